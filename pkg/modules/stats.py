"""族の統計モジュール（t_Σ, C_Σ, 一次モーメント, 1レベル密度）"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import mpmath
import numpy as np
import pandas as pd
import sympy
from scipy.integrate import quad
from sympy import factorint, primerange
from tqdm import tqdm

from modules.analytic import AfeResult, GammaFactor, SmoothWeight, afe_central_value, get_kernel
from modules.artin import D_INVERSE, lambda_local, theta_local
from modules.counting import (
    ResidueConstants,
    SieveFunctional,
    local_spec_weight,
    maximal_density_expr,
    nonmaximal_primes,
    residue_constants,
    series_coefficients,
)
from modules.forms import OrbitRecord
from modules.fourier import maximal_densities
from modules.local import ORBIT_ORDER, LocalWeight, SplittingType, maximalize, splitting_symbol
from utils.config import LocalSpec, get_density_test_options
from utils.errors import ConfigurationError, InvalidTestFunctionError, PartialDataError, PrecisionError

logger = logging.getLogger(__name__)

DENSITY_SUPPORT_LIMIT = 0.4
T_SERIES_GRADE = 16
T_PRIME_CUTOFF = 500
DERIVATIVE_STEP = 1e-3
VANISHING_TOLERANCE = 1e-8
LVALUE_COLUMNS = ['field_disc', 'L_half', 'S_f', 'converged', 'tail_bound']


def _allowed_types(spec: LocalSpec, p: int) -> List[SplittingType]:
    allowed = spec.allowed_at(p)
    return [s for s in ORBIT_ORDER if s.value in allowed and s != SplittingType.ZERO_0]


def _normalized_densities(spec: LocalSpec, p: int) -> Dict[SplittingType, Fraction]:
    """許容される分解型上で正規化した μ"""
    mu = maximal_densities(p).mu
    allowed = _allowed_types(spec, p)
    total = sum((mu[s] for s in allowed), Fraction(0))
    return {s: mu[s] / total for s in allowed}


def t_sigma(spec: LocalSpec, p: int, k: int) -> Fraction:
    """t_Σ(p^k)：極大形式の密度で重み付けた λ_{p^k} の平均"""
    if k == 0:
        return Fraction(1)
    weights = _normalized_densities(spec, p)
    return sum((w * lambda_local(s, k) for s, w in weights.items()), Fraction(0))


def t_sigma_n(spec: LocalSpec, n: int) -> Fraction:
    """t_Σ(n)（乗法的に組み立てる）"""
    return math.prod((t_sigma(spec, p, e) for p, e in factorint(n).items()), start=Fraction(1))


def _local_factor(spec: LocalSpec, p: int, sigma: float) -> float:
    """(1 - p^(-2σ)) Σ_k t_Σ(p^k) p^(-kσ)"""
    y = p ** (-sigma)
    total = 0.0
    for s, w in _normalized_densities(spec, p).items():
        c0, c1, c2 = D_INVERSE[s]
        total += float(w) / (c0 + c1 * y + c2 * y * y)
    return (1 - y * y) * total


def local_factor_positive(spec: LocalSpec, p: int) -> bool:
    """Σ_k t_Σ(p^k)p^(-k/2) > 0 を厳密に判定"""
    y = 1 / sympy.sqrt(p)
    expr = sympy.Integer(0)
    for s, w in _normalized_densities(spec, p).items():
        c0, c1, c2 = D_INVERSE[s]
        expr += sympy.Rational(w.numerator, w.denominator) / (c0 + c1 * y + c2 * y * y)
    positive = sympy.simplify(expr).is_positive
    if positive is None:
        positive = bool(sympy.N(expr, 50) > 0)
    return bool(positive)


def _truncate(series: Dict[Tuple[int, int], Fraction], grade: int) -> Dict[Tuple[int, int], Fraction]:
    return {key: value for key, value in series.items() if value and key[0] + 2 * key[1] <= grade}


def _multiply(u: Dict[Tuple[int, int], Fraction], v: Dict[Tuple[int, int], Fraction],
              grade: int) -> Dict[Tuple[int, int], Fraction]:
    product: Dict[Tuple[int, int], Fraction] = {}
    for (i1, j1), a in u.items():
        for (i2, j2), b in v.items():
            key = (i1 + i2, j1 + j2)
            if key[0] + 2 * key[1] <= grade:
                product[key] = product.get(key, Fraction(0)) + a * b
    return _truncate(product, grade)


@lru_cache(maxsize=None)
def _log_series(grade: int = T_SERIES_GRADE) -> Dict[Tuple[int, int], Fraction]:
    """制約なし局所因子 Φ(y, w) の対数の二変数級数（y = p^(-σ), w = 1/p）"""
    w = sympy.Symbol('w', positive=True)
    phi: Dict[Tuple[int, int], Fraction] = {}
    total = (1 - w**2) * (1 - w**3)
    for s in ORBIT_ORDER:
        if s == SplittingType.ZERO_0:
            continue
        density = series_coefficients(sympy.cancel(maximal_density_expr(s, 1 / w) / total), w, grade // 2)
        lambdas = [lambda_local(s, m) for m in range(grade + 1)]
        for j, a in enumerate(density):
            for i, lam in enumerate(lambdas):
                if a and lam and i + 2 * j <= grade:
                    phi[(i, j)] = phi.get((i, j), Fraction(0)) + a * lam
    phi = _multiply(phi, {(0, 0): Fraction(1), (2, 0): Fraction(-1)}, grade)
    if phi.get((0, 0)) != 1:
        raise PrecisionError("局所因子の定数項が1ではありません", {'constant': str(phi.get((0, 0)))})
    u = {key: value for key, value in phi.items() if key != (0, 0)}
    logs: Dict[Tuple[int, int], Fraction] = {}
    power = {(0, 0): Fraction(1)}
    for n in range(1, grade // 2 + 1):
        power = _multiply(power, u, grade)
        for key, value in power.items():
            logs[key] = logs.get(key, Fraction(0)) + Fraction((-1) ** (n + 1), n) * value
    logs = _truncate(logs, grade)
    divergent = {key: str(v) for key, v in logs.items() if key[0] + 2 * key[1] <= 2}
    if divergent:
        raise PrecisionError("T_Σ/ζ(2s) のオイラー積が収束しません", {'terms': divergent})
    return logs


def log_normalized_product(spec: LocalSpec, sigma: float, prime_cutoff: int = T_PRIME_CUTOFF) -> float:
    """log Π_p (1 - p^(-2σ)) Σ_k t_Σ(p^k) p^(-kσ)（p > P は素数ゼータで補う）"""
    primes = np.array(list(primerange(2, prime_cutoff + 1)), dtype=float)
    value = math.fsum(math.log(_local_factor(LocalSpec(), int(p), sigma)) for p in primes)
    with mpmath.workdps(30):
        for (i, j), b in _log_series().items():
            z = i * sigma + j
            head = float(np.sum(primes ** (-z)))
            value += float(b) * (float(mpmath.primezeta(z)) - head)
    for p in spec.primes:
        value += math.log(_local_factor(spec, p, sigma)) - math.log(_local_factor(LocalSpec(), p, sigma))
    return value


@dataclass
class FamilyAverages:
    """族 F_Σ の平均に関する定数"""
    spec: LocalSpec
    residue: float
    c_sigma: float
    c_prime_sigma: float
    density: float
    constants: ResidueConstants
    details: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, float]:
        return {
            'C_sigma': self.c_sigma,
            'C_prime_sigma': self.c_prime_sigma,
            'residue': self.residue,
            'density': self.density,
            **self.details,
        }


def residue_t_sigma(spec: LocalSpec, prime_cutoff: int = T_PRIME_CUTOFF) -> float:
    """Res_{s=1/2} T_Σ(s) = ½ Π_p (1-p⁻¹) Σ_k t_Σ(p^k) p^(-k/2)"""
    return 0.5 * math.exp(log_normalized_product(spec, 0.5, prime_cutoff))


def _s_t_gamma(spec: LocalSpec, s: float, gamma: GammaFactor, prime_cutoff: int) -> float:
    """s T_Σ(1/2+s) γ(1/2+s)/γ(1/2)"""
    ratio = math.exp(float(np.real(gamma.log_value(0.5 + s) - gamma.log_value(0.5))))
    if s == 0:
        return residue_t_sigma(spec, prime_cutoff) * ratio
    zeta_part = float(s * mpmath.zeta(1 + 2 * s))
    return zeta_part * math.exp(log_normalized_product(spec, 0.5 + s, prime_cutoff)) * ratio


def c_sigma_constants(spec: LocalSpec, psi: Optional[SmoothWeight] = None,
                      prime_cutoff: int = T_PRIME_CUTOFF) -> FamilyAverages:
    """C_Σ と C′_Σ"""
    spec.validate()
    constants = residue_constants(spec.sign)
    bad = [p for p in list(spec.primes) + [2, 3, 5] if not local_factor_positive(spec, p)]
    if bad:
        raise PrecisionError("局所因子が正ではありません", {'primes': bad})
    residue = residue_t_sigma(spec, prime_cutoff)
    gamma = GammaFactor(spec.sign)
    h = DERIVATIVE_STEP
    values = {k: _s_t_gamma(spec, k * h, gamma, prime_cutoff) for k in (-2, -1, 1, 2)}
    c_prime = (values[-2] - 8 * values[-1] + 8 * values[1] - values[2]) / (12 * h)
    density = SieveFunctional.A_max(local_spec_weight(spec))
    c_sigma = constants.orbit_alpha * density * residue
    c_prime_sigma = 2 * constants.orbit_alpha * density * c_prime
    check = residue_t_sigma(spec, 2 * prime_cutoff)
    details = {'residue_doubled_cutoff': check, 'c_prime': c_prime}
    if psi is not None:
        details['psi_derivative'] = psi.mellin_derivative_at_one()
    if c_sigma <= 0:
        raise PrecisionError("C_Σ が正ではありません", {'c_sigma': c_sigma})
    logger.info("C_Σ=%.10f C′_Σ=%.10f", c_sigma, c_prime_sigma)
    return FamilyAverages(spec, residue, c_sigma, c_prime_sigma, density, constants, details)


def t_sigma_size_report(spec: LocalSpec, prime_limit: int = 1000) -> Dict[str, float]:
    """sup p·|t_Σ(p)| と sup p²·|t_Σ(p²) - 1|"""
    first = 0.0
    second = 0.0
    for p in primerange(2, prime_limit + 1):
        if spec.is_specified(p):
            continue
        first = max(first, p * abs(float(t_sigma(spec, p, 1))))
        second = max(second, p * p * abs(float(t_sigma(spec, p, 2)) - 1))
    return {'t_p_constant': first, 't_p2_constant': second}


def _in_family(spec: LocalSpec, weight: LocalWeight, record: OrbitRecord) -> bool:
    """符号・既約性・局所条件・極大性"""
    if (record.discriminant > 0) != (spec.sign > 0) or not record.irreducible:
        return False
    return bool(weight(record.form)) and not nonmaximal_primes(record)


def family_fields(spec: LocalSpec, records: Sequence[OrbitRecord], psi: SmoothWeight,
                  X: float) -> List[Tuple[OrbitRecord, float]]:
    """F_Σ の体（極大・既約な形式）と Ψ(|Δ|/X)"""
    weight = local_spec_weight(spec)
    lo, hi = psi.support
    fields = []
    for record in records:
        ratio = abs(record.discriminant) / X
        if not lo <= ratio <= hi:
            continue
        value = float(psi(ratio))
        if value and _in_family(spec, weight, record):
            fields.append((record, value))
    return sorted(fields, key=lambda item: item[0].sort_key())


def window_fields(spec: LocalSpec, records: Sequence[OrbitRecord], disc_min: int,
                  disc_max: int) -> List[OrbitRecord]:
    """disc_min ≤ |Δ_K| < disc_max を満たす F_Σ の体"""
    weight = local_spec_weight(spec)
    fields = [
        record for record in records
        if disc_min <= abs(record.discriminant) < disc_max and _in_family(spec, weight, record)
    ]
    return sorted(fields, key=lambda record: record.sort_key())


@dataclass
class MomentResult:
    """一次モーメント A_Σ(X)"""
    X: float
    value: float
    prediction: float
    table: pd.DataFrame
    averages: FamilyAverages


def central_values(fields: Sequence[OrbitRecord], kernel: str = 'constant',
                   show_progress: bool = False) -> Dict[Tuple[int, int, int, int], AfeResult]:
    """各体の L(1/2, ρ_K)（打ち切り誤差の情報つき）"""
    values = {}
    for record in tqdm(fields, desc='L(1/2)', disable=not show_progress):
        result = afe_central_value(record.form, get_kernel(1 if record.discriminant > 0 else -1, kernel))
        values[record.form.coefficients] = result
    return values


def l_value_table(fields: Sequence[OrbitRecord], kernel: str = 'constant',
                  show_progress: bool = False) -> pd.DataFrame:
    """体ごとの field_disc, L_half, S_f, converged, tail_bound"""
    values = central_values(fields, kernel, show_progress)
    rows = []
    for record in fields:
        result = values[record.form.coefficients]
        rows.append({
            'field_disc': maximalize(record.form).field_discriminant,
            # 極大形式では L(1/2) = 2S(f)
            'L_half': result.value,
            'S_f': result.value / 2,
            'converged': result.converged,
            'tail_bound': result.tail_bound,
        })
    return pd.DataFrame(rows, columns=LVALUE_COLUMNS)


def first_moment(spec: LocalSpec, psi: SmoothWeight, X: float, records: Sequence[OrbitRecord],
                 l_values: Optional[Mapping[Tuple[int, int, int, int], float]] = None,
                 kernel: str = 'constant', averages: Optional[FamilyAverages] = None) -> MomentResult:
    """A_Σ(X) = Σ L(1/2, ρ_K) Ψ(|Δ_K|/X) と予測値"""
    fields = family_fields(spec, records, psi, X)
    if l_values is None:
        computed = central_values([record for record, _ in fields], kernel)
        l_values = {key: result.value for key, result in computed.items()}
    missing = [record.form.coefficients for record, _ in fields if record.form.coefficients not in l_values]
    if missing:
        raise PartialDataError(f"L(1/2) が {len(missing)} 体で欠けています", missing)
    rows = []
    for record, value in fields:
        a, b, c, d = record.form.coefficients
        rows.append({
            'a': a, 'b': b, 'c': c, 'd': d,
            'disc': record.discriminant,
            'psi': value,
            'L_half': l_values[record.form.coefficients],
        })
    table = pd.DataFrame(rows, columns=['a', 'b', 'c', 'd', 'disc', 'psi', 'L_half'])
    total = math.fsum(row['psi'] * row['L_half'] for row in rows)
    if averages is None:
        averages = c_sigma_constants(spec, psi)
    prediction = (averages.c_sigma * X * (math.log(X) + psi.mellin_derivative_at_one())
                  + averages.c_prime_sigma * X)
    return MomentResult(X, total, prediction, table, averages)


def moment_slope(results: Sequence[MomentResult]) -> float:
    """A_Σ(X)/X を log X に回帰した傾き"""
    if len(results) < 2:
        raise PartialDataError("回帰には2点以上が必要です", [r.X for r in results])
    x = np.log([r.X for r in results])
    y = np.array([r.value / r.X for r in results])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _window_values(table: pd.DataFrame, lo: float, hi: float) -> np.ndarray:
    size = table['field_disc'].abs()
    return table.loc[(size >= lo) & (size < hi), 'L_half'].to_numpy(dtype=float)


def ma_pa_sums(table: pd.DataFrame, X: float) -> Dict[str, float]:
    """MA_Σ, PA_Σ（[X, 2X)）と拡げた窓 [X/2, 4X) の PA"""
    values = _window_values(table, X, 2 * X)
    wide = _window_values(table, X / 2, 4 * X)
    ma = math.fsum(np.abs(values))
    pa = math.fsum(np.maximum(values, 0.0))
    a = math.fsum(values)
    pa_wide = math.fsum(np.maximum(wide, 0.0))
    return {
        'MA': ma,
        'PA': pa,
        'A': a,
        'PA_wide': pa_wide,
        'identity_gap': abs(ma - (2 * pa - a)),
        'bound_holds': ma <= 2 * pa_wide + abs(a) + 1e-9 * max(ma, 1.0),
    }


def nonvanishing_report(table: pd.DataFrame, X: float,
                        tolerance: float = VANISHING_TOLERANCE) -> Dict[str, float]:
    """L(1/2) の符号ごとの個数と δ_Σ(X)"""
    values = table['L_half'].to_numpy(dtype=float)
    positive = int(np.sum(values > tolerance))
    negative = int(np.sum(values < -tolerance))
    vanishing = int(values.size - positive - negative)
    delta = math.log(positive) / math.log(X) if positive > 0 and X > 1 else 0.0
    return {'fields': int(values.size), 'positive': positive, 'negative': negative,
            'vanishing': vanishing, 'delta': delta}


class DensityTestFunction:
    """偶関数 Φ とコンパクト台のフーリエ変換 Φ̂"""

    def __init__(self, kind: str = 'fejer', support: float = 1.0 / 3.0, scale: float = 1.0):
        if kind not in get_density_test_options():
            raise ConfigurationError(f"未知のテスト関数: {kind}")
        if not 0 < support <= DENSITY_SUPPORT_LIMIT:
            raise InvalidTestFunctionError(f"Φ̂ の台 ({-support}, {support}) が広すぎます")
        self.kind = kind
        self.support = support
        self.scale = scale

    def hat(self, t) -> np.ndarray:
        """Φ̂(t)"""
        x = np.abs(np.asarray(t, dtype=float)) / self.support
        if self.kind == 'fejer':
            return self.scale * np.clip(1 - x, 0.0, None)
        inside = x < 1
        safe = np.where(inside, x, 0.0)
        return np.where(inside, self.scale * np.exp(1 - 1 / (1 - safe * safe)), 0.0)

    def __call__(self, x: float) -> float:
        """Φ(x) = ∫ Φ̂(t) cos(2πxt) dt"""
        if self.kind == 'fejer':
            a = self.support
            return float(self.scale * a * np.sinc(a * x) ** 2)
        value, _ = quad(lambda t: float(self.hat(t)) * math.cos(2 * math.pi * x * t),
                        -self.support, self.support, limit=200)
        return value

    def check(self) -> bool:
        """偶関数性と台の包含を数値的に確認"""
        points = np.linspace(0, 3, 13)
        even = all(abs(self(x) - self(-x)) <= 1e-12 for x in points)
        outside = self.hat(np.array([self.support, 1.01 * self.support, -1.01 * self.support]))
        return even and not np.any(outside)

    def prediction(self) -> float:
        """Φ̂(0) - ½∫_{-1}^{1} Φ̂(t) dt"""
        if self.kind == 'fejer':
            return self.scale * (1 - self.support / 2)
        integral, _ = quad(lambda t: float(self.hat(t)), -self.support, self.support, limit=200)
        return float(self.hat(0.0)) - 0.5 * integral


@dataclass
class DensityResult:
    """1レベル密度"""
    X: float
    value: float
    prediction: float
    z1: float
    z2: float
    log_conductor: float
    fields: int
    terms: pd.DataFrame


def _weighted_average(values: Sequence[float], weights: Sequence[float]) -> float:
    return math.fsum(v * w for v, w in zip(values, weights)) / math.fsum(weights)


def one_level_density(spec: LocalSpec, phi: DensityTestFunction, X: float, records: Sequence[OrbitRecord],
                      psi: Optional[SmoothWeight] = None) -> DensityResult:
    """明示公式の素数和による 1 レベル密度"""
    if not phi.check():
        raise InvalidTestFunctionError("Φ が偶関数でないか Φ̂ の台が区間に収まっていません")
    if not any(spec.allowed_at(p) == frozenset({'3'}) for p in spec.primes):
        logger.warning("惰性素数の指定がありません（極限の主張の前提外）")
    psi = psi or SmoothWeight('bump')
    fields = family_fields(spec, records, psi, X)
    if not fields:
        raise PartialDataError("族に体がありません", [X])
    weights = [w for _, w in fields]
    log_conductor = _weighted_average([math.log(abs(r.discriminant)) for r, _ in fields], weights)
    z1 = float(phi.hat(0.0)) * _weighted_average(
        [math.log(abs(r.discriminant)) / log_conductor for r, _ in fields], weights)
    limit = math.exp(phi.support * log_conductor)
    rows = []
    z2 = 0.0
    for p in primerange(2, int(limit) + 1):
        symbols = [splitting_symbol(r.form, p) for r, _ in fields]
        m = 1
        while p**m < limit:
            average = _weighted_average([theta_local(s, m) for s in symbols], weights)
            hat = float(phi.hat(m * math.log(p) / log_conductor))
            term = -2 / log_conductor * math.log(p) / p ** (m / 2) * hat * average
            z2 += term
            rows.append({'p': p, 'm': m, 'theta_average': average, 'term': term})
            m += 1
    terms = pd.DataFrame(rows, columns=['p', 'm', 'theta_average', 'term'])
    return DensityResult(X, z1 + z2, phi.prediction(), z1, z2, log_conductor, len(fields), terms)


def theta_square_report(spec: LocalSpec, psi: SmoothWeight, X: float, records: Sequence[OrbitRecord],
                        primes: Sequence[int]) -> pd.DataFrame:
    """族平均 S_Σ(θ_K(p²))/S_Σ(1) と 1 からのずれ"""
    fields = family_fields(spec, records, psi, X)
    if not fields:
        raise PartialDataError("族に体がありません", [X])
    weights = [w for _, w in fields]
    rows = []
    for p in primes:
        average = _weighted_average([theta_local(splitting_symbol(r.form, p), 2) for r, _ in fields], weights)
        deviation = average - 1
        rows.append({
            'p': p,
            'average': average,
            'deviation': deviation,
            'scaled': abs(deviation) / (p**-2 + X ** (-1 / 6)),
        })
    return pd.DataFrame(rows, columns=['p', 'average', 'deviation', 'scaled'])
