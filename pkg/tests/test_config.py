"""設定と局所条件のテスト"""
from pathlib import Path

import pytest

from utils.config import (
    SPLITTING_SYMBOLS,
    LocalSpec,
    RunConfig,
    get_cache_dir,
    local_spec_from_mapping,
    parse_local_spec,
)
from utils.errors import ConfigurationError


def test_parse_local_spec():
    spec = parse_local_spec('sign=-1;5:3;7:111,12')
    assert spec.sign == -1
    assert spec.primes == [5, 7]
    assert spec.allowed_at(5) == frozenset({'3'})
    assert spec.allowed_at(7) == frozenset({'111', '12'})
    assert spec.allowed_at(11) == frozenset(SPLITTING_SYMBOLS)
    assert spec.is_specified(7) and not spec.is_specified(11)


@pytest.mark.parametrize('text', ['4:3', '5:9', 'sign=x', 'bogus', 'sign=2', 'inert;5:111'])
def test_parse_local_spec_errors(text):
    with pytest.raises(ConfigurationError):
        parse_local_spec(text)


def test_inert_requirement_satisfied():
    assert parse_local_spec('inert;5:3').require_inert


def test_local_spec_from_mapping():
    spec = local_spec_from_mapping({'sign': 1, 'primes': {'7': ['3']}})
    assert spec == LocalSpec(1, ((7, frozenset({'3'})),))
    assert spec.to_dict() == {'sign': 1, 'allowed': {'7': ['3']}, 'require_inert': False}


def test_run_config_defaults_validate():
    config = RunConfig(cache_dir=Path('cache'), workers=1).validate()
    assert config.signs == (1, -1)
    assert 'workers' not in config.to_dict()


@pytest.mark.parametrize('changes', [
    {'max_disc': 0},
    {'signs': (2,)},
    {'kernel': 'unknown'},
    {'weight': 'unknown'},
    {'tolerance': 0.0},
    {'density_support': 0.5},
    {'test_function': 'unknown'},
    {'workers': 0},
    {'disc_min': 50, 'disc_max': 40},
    {'disc_min': 0},
])
def test_run_config_errors(changes):
    config = RunConfig(cache_dir=Path('cache'), **{'workers': 1, **changes})
    with pytest.raises(ConfigurationError):
        config.validate()


def test_disc_window_defaults():
    assert RunConfig(cache_dir=Path('cache'), workers=1, max_disc=500).disc_window == (1, 500)
    config = RunConfig(cache_dir=Path('cache'), workers=1, disc_min=20, disc_max=40).validate()
    assert config.disc_window == (20, 40)


def test_config_hash_ignores_workers():
    first = RunConfig(cache_dir=Path('cache'), workers=1)
    second = RunConfig(cache_dir=Path('cache'), workers=4)
    assert first.config_hash() == second.config_hash()
    assert first.config_hash() != RunConfig(cache_dir=Path('cache'), workers=1, max_disc=500).config_hash()


def test_cache_dir_from_environment(monkeypatch, tmp_path):
    monkeypatch.setenv('CUBICFORMS_CACHE_DIR', str(tmp_path))
    assert get_cache_dir() == tmp_path
