"""二元三次形式ツールキット メインアプリケーション"""
import argparse
import itertools
import logging
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from modules.analytic import (
    SmoothWeight,
    afe_central_value,
    easy_bound_constant,
    g_mellin_check,
    get_kernel,
    h_transform_sup,
    mellin_identity_check,
    unbalanced_afe_residual,
    zeta_oracle_check,
)
from modules.counting import (
    SieveFunctional,
    davenport_report,
    field_count,
    field_count_prediction,
    index_shape_report,
    local_spec_weight,
    nonmaximal_primes,
    polya_vinogradov_check,
    predicted_count,
    sieve_to_maximal,
    smoothed_count,
    suborder_check,
)
from modules.data_processor import ResultProcessor
from modules.forms import OrbitRecord
from modules.fourier import (
    brute_force_ft,
    double_transform_check,
    dual_invariance_check,
    hat_bound_check,
    lambda_function,
    maximal_densities,
    maximal_density_by_count,
    plancherel_check,
    theta_function,
    transform_matrix,
    verify_orthogonality,
)
from modules.local import LocalWeight, SplittingType, switching_check, weighted_switching_check
from modules.stats import (
    DensityTestFunction,
    c_sigma_constants,
    family_fields,
    first_moment,
    l_value_table,
    ma_pa_sums,
    moment_slope,
    nonvanishing_report,
    one_level_density,
    theta_square_report,
    window_fields,
)
from utils.cache import OrbitCache
from utils.config import (
    DENSITY_TEST_OPTIONS,
    KERNEL_OPTIONS,
    SMOOTH_WEIGHT_OPTIONS,
    LocalSpec,
    RunConfig,
    get_cache_dir,
    get_local_spec,
    get_worker_count,
    parse_local_spec,
)
from utils.errors import CacheMismatchError, CubicFormsError, PartialDataError
from utils.logging_setup import setup_logging, show_progress

logger = logging.getLogger(__name__)

SELFTEST_DISC = 2000
SUBORDER_FIELDS = 10
SUBORDER_INDEX = 40
AFE_SAMPLE = 12
COMPARISON_KERNEL = 'cosine'


def build_parser() -> argparse.ArgumentParser:
    """コマンドライン引数の定義"""
    parser = argparse.ArgumentParser(prog='cubicforms', description='二元三次形式と三次体の数え上げ・L関数ツールキット')
    parser.add_argument('--log-level', default=None, help='ログレベル（既定は CUBICFORMS_LOG_LEVEL）')
    sub = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--max-disc', type=int, default=10**4, help='判別式の上限 X')
    common.add_argument('--sign', type=int, choices=(1, -1), action='append', help='判別式の符号（複数指定可）')
    common.add_argument('--sigma', default=None, help="局所条件（例: 'sign=-1;5:3;7:111,12'）")
    common.add_argument('--kernel', choices=sorted(KERNEL_OPTIONS), default='constant')
    common.add_argument('--weight', choices=sorted(SMOOTH_WEIGHT_OPTIONS), default='bump')
    common.add_argument('--tolerance', type=float, default=1e-8)
    common.add_argument('--density-support', type=float, default=1.0 / 3.0)
    common.add_argument('--test-function', choices=sorted(DENSITY_TEST_OPTIONS), default='fejer')
    common.add_argument('--primes', default='5,7,11', help='検証に使う素数（カンマ区切り）')
    common.add_argument('--cache-dir', type=Path, default=None)
    common.add_argument('--output-dir', type=Path, default=Path('output'))
    common.add_argument('--workers', type=int, default=None)
    common.add_argument('--disc-min', type=int, default=None, help='lvalue の対象 |Δ| の下限（既定 1）')
    common.add_argument('--disc-max', type=int, default=None, help='lvalue の対象 |Δ| の上限（既定は --max-disc）')

    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMANDS[name][1])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """引数から実行設定を構築して検証"""
    spec = parse_local_spec(args.sigma) if args.sigma else get_local_spec()
    signs = tuple(args.sign) if args.sign else ((spec.sign,) if args.sigma else (1, -1))
    config = RunConfig(
        max_disc=args.max_disc,
        signs=signs,
        local_spec=spec,
        kernel=args.kernel,
        weight=args.weight,
        tolerance=args.tolerance,
        density_support=args.density_support,
        test_function=args.test_function,
        primes=tuple(int(p) for p in args.primes.split(',') if p.strip()),
        cache_dir=args.cache_dir or get_cache_dir(),
        output_dir=args.output_dir,
        workers=args.workers or get_worker_count(),
        disc_min=args.disc_min,
        disc_max=args.disc_max,
    )
    return config.validate()


def _records(config: RunConfig, sign: int, bound: Optional[int] = None) -> List[OrbitRecord]:
    return OrbitCache(config.cache_dir).get_or_enumerate(sign, bound or config.max_disc, config.workers)


def _window_X(config: RunConfig) -> float:
    """Ψ の台 [1, 2] が判別式上限に収まる X"""
    return config.max_disc / 2


def run_enumerate(config: RunConfig) -> Dict[str, Any]:
    """軌道代表元を列挙して CSV に書き出す"""
    summary = {}
    for sign in config.signs:
        records = _records(config, sign)
        df = ResultProcessor.orbits_to_frame(records)
        ResultProcessor.write_csv(df, config.output_dir / f"orbits_{'pos' if sign > 0 else 'neg'}.csv")
        summary[str(sign)] = {
            'orbits': len(records),
            'irreducible': int(df['irreducible'].sum()) if len(df) else 0,
        }
    return summary


def _count_weights(p: int) -> Dict[str, LocalWeight]:
    return {
        '1': LocalWeight(),
        f'lambda_{p}': lambda_function(p, 1).to_local_weight(p),
        f'theta_{p}^2': theta_function(p, 2).to_local_weight(p),
        f'zero_{p}': LocalWeight.from_mapping({p: {SplittingType.ZERO_0: Fraction(1)}}),
    }


def run_count(config: RunConfig) -> Dict[str, Any]:
    """Ψ 重み付き軌道数と留数予測の比較"""
    psi = SmoothWeight(config.weight)
    X = _window_X(config)
    rows = []
    for sign in config.signs:
        records = _records(config, sign)
        for p in config.primes:
            for name, weight in _count_weights(p).items():
                lhs = smoothed_count(weight, psi, X, sign, records)
                main, secondary = predicted_count(weight, psi, X, sign)
                rows.append({'sign': sign, 'weight': name, 'X': X, 'count': lhs, 'main': main,
                             'secondary': secondary,
                             'relative_error': ResultProcessor.relative_error(lhs, main + secondary)})
        spec = _family_spec(config, sign)
        actual = field_count(spec, psi, X, records)
        main, secondary = field_count_prediction(spec, psi, X)
        rows.append({'sign': sign, 'weight': 'fields', 'X': X, 'count': actual, 'main': main,
                     'secondary': secondary,
                     'relative_error': ResultProcessor.relative_error(actual, main + secondary)})
    df = ResultProcessor.to_frame(rows, ['sign', 'weight', 'X', 'count', 'main', 'secondary', 'relative_error'])
    ResultProcessor.write_csv(df, config.output_dir / 'count.csv')
    return {'rows': len(rows)}


def _squarefree_products(primes: Sequence[int], limit: int) -> List[int]:
    values = set()
    for r in range(1, len(primes) + 1):
        for subset in itertools.combinations(sorted(set(primes)), r):
            q = math.prod(subset)
            if q <= limit:
                values.add(q)
    return sorted(values)


def run_sieve_verify(config: RunConfig) -> Dict[str, Any]:
    """包除原理・スイッチング恒等式の厳密検証と Davenport 型の裾の報告"""
    psi = SmoothWeight(config.weight)
    X = _window_X(config)
    weight = local_spec_weight(config.local_spec)
    rows = []
    tail_rows = []
    checks: Dict[str, bool] = {}
    for sign in config.signs:
        records = _records(config, sign)
        report = sieve_to_maximal(weight, psi, X, sign, records)
        checks[f'sieve_{sign}'] = report.exact
        rows.append({'sign': sign, 'check': 'sieve', 'q': 0, 'lhs': float(report.sieved),
                     'rhs': float(report.direct), 'exact': report.exact})
        for q in _squarefree_products([2, 3] + list(config.primes), 30):
            switching = switching_check(q, config.max_disc, sign, records)
            checks[f'switching_{sign}_{q}'] = switching.holds
            rows.append({'sign': sign, 'check': 'switching', 'q': q, 'lhs': float(switching.lhs),
                         'rhs': float(switching.rhs), 'exact': switching.holds})
        for q, values in davenport_report(records, config.max_disc, sign).items():
            tail_rows.append({'sign': sign, 'kind': 'davenport', 'key': q, **values})
        for b, values in index_shape_report(records, config.max_disc, sign).items():
            tail_rows.append({'sign': sign, 'kind': 'index', 'key': b, 'count': values['count'], 'C': values['C']})
    identity = SieveFunctional.inclusion_exclusion_check(weight, list(config.primes))
    checks['inclusion_exclusion'] = identity['A_exact']
    ResultProcessor.write_csv(
        ResultProcessor.to_frame(rows, ['sign', 'check', 'q', 'lhs', 'rhs', 'exact']),
        config.output_dir / 'sieve.csv')
    ResultProcessor.write_csv(
        ResultProcessor.to_frame(tail_rows, ['sign', 'kind', 'key', 'count', 'C']),
        config.output_dir / 'tails.csv')
    return ResultProcessor.summarize(checks)


def run_fourier_verify(config: RunConfig) -> Dict[str, Any]:
    """有限体上のフーリエ変換の恒等式"""
    checks: Dict[str, bool] = {}
    rows = []
    for p in sorted({2, 3} | set(config.primes)):
        matrix = transform_matrix(p)
        for i, label in enumerate(matrix.row_labels):
            rows.append({'p': p, 'dual_orbit': label, **{f'C{j + 1}': str(v) for j, v in enumerate(matrix.row(i))}})
        checks[f'orthogonality_{p}'] = all(ok for _, _, ok in verify_orthogonality(p))
        checks[f'double_{p}'] = double_transform_check(p)
        checks[f'plancherel_{p}'] = plancherel_check(lambda_function(p, 1), theta_function(p, 2), p)
        checks[f'hat_bound_{p}'] = all(row.holds for row in hat_bound_check(p))
        if p in (2, 5):
            checks[f'closed_form_{p}'] = brute_force_ft(p).entries == matrix.entries
        if p in (2, 3):
            checks[f'dual_invariance_{p}'] = dual_invariance_check(lambda_function(p, 1), p)
    checks['maximal_density_2'] = maximal_density_by_count(2) == maximal_densities(2).mu
    ResultProcessor.write_csv(ResultProcessor.to_frame(rows), config.output_dir / 'fourier.csv')
    return ResultProcessor.summarize(checks)


def run_pv_check(config: RunConfig) -> Dict[str, Any]:
    """三次版ポリア・ヴィノグラドフの残差比"""
    psi = SmoothWeight(config.weight)
    X = _window_X(config)
    rows = []
    for sign in config.signs:
        records = _records(config, sign)
        for p in config.primes:
            for k in (1, 2):
                report = polya_vinogradov_check(p, psi, X, sign, records, k)
                rows.append({'sign': sign, 'p': p, 'k': k, 'lhs': report.lhs, 'main': report.main,
                             'secondary': report.secondary, 'remainder': report.remainder,
                             'ratio': report.ratio})
    df = ResultProcessor.to_frame(rows, ['sign', 'p', 'k', 'lhs', 'main', 'secondary', 'remainder', 'ratio'])
    ResultProcessor.write_csv(df, config.output_dir / 'pv_check.csv')
    return {'max_ratio': float(df['ratio'].max()) if len(df) else 0.0}


def run_suborders(config: RunConfig) -> Dict[str, Any]:
    """部分整環の個数をゼータ関数の係数と格子の列挙で比較"""
    rows = []
    for sign in config.signs:
        fields = [r for r in _records(config, sign) if r.irreducible and not nonmaximal_primes(r)]
        for record in fields[:SUBORDER_FIELDS]:
            result = suborder_check(record.form, SUBORDER_INDEX)
            rows.append({'sign': sign, 'disc': record.discriminant, 'form': str(record.form), 'Z': SUBORDER_INDEX,
                         **result, 'match': result['zeta'] == result['lattice']})
    df = ResultProcessor.to_frame(rows, ['sign', 'disc', 'form', 'Z', 'zeta', 'lattice', 'match'])
    ResultProcessor.write_csv(df, config.output_dir / 'suborders.csv')
    return ResultProcessor.summarize({f"{row['sign']}_{row['disc']}": row['match'] for row in rows})


def _family_spec(config: RunConfig, sign: int) -> LocalSpec:
    return config.local_spec if config.local_spec.sign == sign else LocalSpec(sign=sign)


def run_lvalue(config: RunConfig) -> Dict[str, Any]:
    """族の各体の L(1/2, ρ_K)"""
    summary = {}
    for sign in config.signs:
        lo, hi = config.disc_window
        fields = window_fields(_family_spec(config, sign), _records(config, sign, hi), lo, hi)
        df = l_value_table(fields, config.kernel, show_progress())
        ResultProcessor.write_csv(df, config.output_dir / f"lvalues_{'pos' if sign > 0 else 'neg'}.csv")
        summary[str(sign)] = len(df)
    return summary


def run_afe_verify(config: RunConfig) -> Dict[str, Any]:
    """非平衡AFE・ζ_K オラクル・メリン変換の検証"""
    rows = []
    forms = []
    worst_mellin = 0.0
    worst_g = 0.0
    h_sup = 0.0
    psi = SmoothWeight(config.weight)
    for sign in config.signs:
        kernel = get_kernel(sign, config.kernel)
        worst_g = max(worst_g, g_mellin_check(psi, kernel))
        h_sup = max(h_sup, h_transform_sup(psi, kernel)['sup'])
        other = get_kernel(sign, COMPARISON_KERNEL if config.kernel != COMPARISON_KERNEL else 'constant')
        worst_mellin = max(worst_mellin, mellin_identity_check(kernel))
        irreducible = [r for r in _records(config, sign) if r.irreducible]
        maximal = [r for r in irreducible if not nonmaximal_primes(r)][:AFE_SAMPLE // 2]
        others = [r for r in irreducible if nonmaximal_primes(r)][:AFE_SAMPLE // 2]
        for record in maximal + others:
            forms.append(record.form)
            report = unbalanced_afe_residual(record.form, kernel)
            row = {'sign': sign, 'form': str(record.form), 'disc': record.discriminant,
                   'S': report.S, 'D': report.D, 'correction': report.correction, 'residual': report.residual}
            if record in maximal:
                oracle = zeta_oracle_check(record.form, kernel)
                row['oracle_difference'] = oracle['difference']
                row['kernel_difference'] = abs(oracle['L'] - afe_central_value(record.form, other).value)
            rows.append(row)
    df = ResultProcessor.to_frame(rows, ['sign', 'form', 'disc', 'S', 'D', 'correction', 'residual',
                                         'oracle_difference', 'kernel_difference'])
    ResultProcessor.write_csv(df, config.output_dir / 'afe_verify.csv')
    bound = easy_bound_constant(forms, config.kernel) if forms else {}
    max_residual = float(df['residual'].abs().max()) if len(df) else 0.0
    kernel_difference = df['kernel_difference'].dropna()
    return {'max_residual': max_residual, 'within_tolerance': max_residual < config.tolerance,
            'max_kernel_difference': float(max(kernel_difference, default=0.0)),
            'mellin_difference': worst_mellin, 'g_mellin_difference': worst_g, 'h_sup': h_sup,
            'easy_bound': bound}


def run_moment(config: RunConfig) -> Dict[str, Any]:
    """一次モーメント A_Σ(X) と C_Σ, C′_Σ"""
    spec = config.local_spec
    psi = SmoothWeight(config.weight)
    averages = c_sigma_constants(spec, psi)
    records = _records(config, spec.sign)
    results = []
    rows = []
    for i in range(3, -1, -1):
        X = _window_X(config) / 2**i
        result = first_moment(spec, psi, X, records, kernel=config.kernel, averages=averages)
        results.append(result)
        rows.append({'X': X, 'A': result.value, 'prediction': result.prediction, 'fields': len(result.table)})
    ResultProcessor.write_csv(ResultProcessor.to_frame(rows, ['X', 'A', 'prediction', 'fields']),
                              config.output_dir / 'moment.csv')
    ResultProcessor.write_csv(results[-1].table, config.output_dir / 'moment_fields.csv')
    summary = {
        'C_sigma': averages.c_sigma,
        'C_prime_sigma': averages.c_prime_sigma,
        'A_of_X': rows,
        'slope': moment_slope(results) if all(len(r.table) for r in results) else None,
        'ma_pa': ma_pa_sums(results[-1].table, _window_X(config)),
    }
    ResultProcessor.write_json(summary, config.output_dir / 'moment.json')
    return {'C_sigma': averages.c_sigma, 'C_prime_sigma': averages.c_prime_sigma}


def run_density(config: RunConfig) -> Dict[str, Any]:
    """明示公式による 1 レベル密度"""
    spec = config.local_spec
    psi = SmoothWeight(config.weight)
    phi = DensityTestFunction(config.test_function, config.density_support)
    records = _records(config, spec.sign)
    rows = []
    last = None
    for i in range(2, -1, -1):
        X = _window_X(config) / 4**i
        last = one_level_density(spec, phi, X, records, psi)
        rows.append({'X': X, 'D': last.value, 'prediction': last.prediction, 'z1': last.z1, 'z2': last.z2,
                     'log_conductor': last.log_conductor, 'fields': last.fields})
    ResultProcessor.write_csv(ResultProcessor.to_frame(rows), config.output_dir / 'density.csv')
    ResultProcessor.write_csv(last.terms, config.output_dir / 'density_terms.csv')
    theta = theta_square_report(spec, psi, _window_X(config), records, list(config.primes))
    ResultProcessor.write_csv(theta, config.output_dir / 'theta_p2.csv')
    ResultProcessor.write_json({'D_of_X': rows}, config.output_dir / 'density.json')
    return {'D': last.value, 'prediction': last.prediction}


def run_nonvanishing(config: RunConfig) -> Dict[str, Any]:
    """L(1/2) の非消滅と MA/PA の報告"""
    summary = {}
    for sign in config.signs:
        X = _window_X(config)
        fields = family_fields(_family_spec(config, sign), _records(config, sign), SmoothWeight(config.weight), X)
        df = l_value_table([record for record, _ in fields], config.kernel, show_progress())
        summary[str(sign)] = {**nonvanishing_report(df, X, config.tolerance), **ma_pa_sums(df, X)}
    ResultProcessor.write_json(summary, config.output_dir / 'nonvanishing.json')
    return summary


def run_selftest(config: RunConfig) -> Dict[str, Any]:
    """厳密な恒等式の一括検証（フーリエ, スイッチング, 篩）"""
    checks: Dict[str, bool] = {}
    for p in (2, 3, 5, 7):
        checks[f'orthogonality_{p}'] = all(ok for _, _, ok in verify_orthogonality(p))
        checks[f'double_{p}'] = double_transform_check(p)
    psi = SmoothWeight('sharp')
    weight = lambda_function(5, 1).to_local_weight(5)
    cache = OrbitCache(config.cache_dir)
    for sign in (1, -1):
        records = cache.get_or_enumerate(sign, SELFTEST_DISC, config.workers)
        for q in (2, 3, 5, 6):
            checks[f'switching_{sign}_{q}'] = switching_check(q, SELFTEST_DISC, sign, records).holds
        checks[f'weighted_switching_{sign}'] = weighted_switching_check(2, weight, SELFTEST_DISC, sign, records).holds
        checks[f'sieve_{sign}'] = sieve_to_maximal(weight, psi, SELFTEST_DISC / 2, sign, records).exact
    checks['inclusion_exclusion'] = SieveFunctional.inclusion_exclusion_check(weight, [2, 3])['A_exact']
    summary = ResultProcessor.summarize(checks)
    ResultProcessor.write_json({'checks': checks, **summary}, config.output_dir / 'selftest.json')
    return summary


COMMANDS: Dict[str, Any] = {
    'enumerate': (run_enumerate, '軌道代表元の列挙'),
    'count': (run_count, '重み付き軌道数と予測'),
    'sieve-verify': (run_sieve_verify, '篩とスイッチングの検証'),
    'fourier-verify': (run_fourier_verify, 'フーリエ変換の恒等式'),
    'pv-check': (run_pv_check, 'ポリア・ヴィノグラドフ型の検証'),
    'suborders': (run_suborders, '部分整環の数え上げ'),
    'lvalue': (run_lvalue, 'L(1/2) の計算'),
    'afe-verify': (run_afe_verify, 'AFE の検証'),
    'moment': (run_moment, '一次モーメント'),
    'density': (run_density, '1レベル密度'),
    'nonvanishing': (run_nonvanishing, '非消滅の報告'),
    'selftest': (run_selftest, '恒等式の一括検証'),
}


def run(command: str, config: RunConfig) -> int:
    """サブコマンドを実行して終了コードを返す"""
    started = time.time()
    handler: Callable[[RunConfig], Dict[str, Any]] = COMMANDS[command][0]
    try:
        summary = handler(config)
    except CacheMismatchError as e:
        logger.error("%s（キャッシュディレクトリ %s を削除して再実行してください）", e, config.cache_dir)
        return 2
    except PartialDataError as e:
        logger.error("データが不足しています: %s", e)
        ResultProcessor.write_json({'error': str(e), 'missing': e.missing}, config.output_dir / 'partial.json')
        ResultProcessor.write_manifest(config.output_dir, command, config, started, {'status': 'partial'})
        return 3
    except CubicFormsError as e:
        logger.error("実行に失敗しました: %s", e)
        return 1
    ResultProcessor.write_manifest(config.output_dir, command, config, started)
    ResultProcessor.write_json(summary, config.output_dir / f"{command}_summary.json")
    if isinstance(summary, dict) and summary.get('ok') is False:
        logger.error("失敗した検査: %s", summary.get('failed'))
        return 1
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    """エントリポイント"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        config = config_from_args(args)
    except CubicFormsError as e:
        logger.error("設定エラー: %s", e)
        return 1
    return run(args.command, config)


if __name__ == '__main__':
    sys.exit(main())
