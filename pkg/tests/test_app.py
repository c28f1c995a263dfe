"""コマンドラインのテスト"""
import json

import pandas as pd
import pytest

from app import build_parser, config_from_args, main


def _paths(tmp_path):
    return ['--cache-dir', str(tmp_path / 'cache'), '--output-dir', str(tmp_path / 'out')]


def test_config_from_args_uses_sigma_sign(tmp_path):
    args = build_parser().parse_args(['count', '--sigma', 'sign=-1;5:3', *_paths(tmp_path)])
    config = config_from_args(args)
    assert config.signs == (-1,)
    assert config.local_spec.allowed_at(5) == frozenset({'3'})


def test_enumerate_writes_outputs(tmp_path):
    argv = ['enumerate', '--max-disc', '200', '--sign', '-1', *_paths(tmp_path)]
    assert main(argv) == 0
    out = tmp_path / 'out'
    df = pd.read_csv(out / 'orbits_neg.csv')
    assert (df['disc'] == -23).sum() == 1
    manifest = json.loads((out / 'manifest.json').read_text(encoding='utf-8'))
    assert manifest['command'] == 'enumerate'
    first = (out / 'orbits_neg.csv').read_bytes()

    assert main(argv) == 0
    assert (out / 'orbits_neg.csv').read_bytes() == first


def test_cache_mismatch_exit_code(tmp_path):
    argv = ['enumerate', '--max-disc', '100', '--sign', '1', *_paths(tmp_path)]
    assert main(argv) == 0
    path = next((tmp_path / 'cache').glob('orbits_pos_100_*.jsonl'))
    lines = path.read_text(encoding='utf-8').splitlines()
    header = json.loads(lines[0])
    header['X'] = 99
    path.write_text('\n'.join([json.dumps(header)] + lines[1:]) + '\n', encoding='utf-8')
    assert main(argv) == 2


def test_lvalue_empty_family_writes_header(tmp_path):
    assert main(['lvalue', '--max-disc', '20', '--sign', '-1', *_paths(tmp_path)]) == 0
    text = (tmp_path / 'out' / 'lvalues_neg.csv').read_text(encoding='utf-8')
    assert text.splitlines() == ['field_disc,L_half,S_f,converged,tail_bound']


def test_lvalue_discriminant_window(tmp_path):
    argv = ['lvalue', '--max-disc', '100', '--disc-min', '20', '--disc-max', '40', '--sign', '-1', *_paths(tmp_path)]
    assert main(argv) == 0
    df = pd.read_csv(tmp_path / 'out' / 'lvalues_neg.csv')
    assert list(df['field_disc']) == [-23, -31]
    assert list(df['L_half']) == pytest.approx(list(2 * df['S_f']))
    assert (df['tail_bound'] >= 0).all()


def test_lvalue_rejects_empty_window(tmp_path):
    argv = ['lvalue', '--disc-min', '50', '--disc-max', '40', '--sign', '-1', *_paths(tmp_path)]
    assert main(argv) == 1


def test_invalid_configuration(tmp_path):
    assert main(['count', '--density-support', '0.5', *_paths(tmp_path)]) == 1


def test_fourier_verify(tmp_path):
    assert main(['fourier-verify', '--primes', '5', *_paths(tmp_path)]) == 0
    summary = json.loads((tmp_path / 'out' / 'fourier-verify_summary.json').read_text(encoding='utf-8'))
    assert summary['ok']


@pytest.mark.slow
def test_selftest(tmp_path):
    assert main(['selftest', *_paths(tmp_path)]) == 0
