"""軌道キャッシュのテスト"""
import json

import pytest

from modules.forms import enumerate_orbits
from utils.cache import OrbitCache
from utils.errors import CacheMismatchError


@pytest.fixture(scope='module')
def small_records():
    return list(enumerate_orbits(300, -1, workers=1))


def test_store_and_load(tmp_path, small_records):
    cache = OrbitCache(tmp_path)
    path = cache.store(-1, 300, small_records)
    assert path.name == 'orbits_neg_300_v1.jsonl'
    assert cache.load(-1, 300) == small_records


def test_missing_cache_returns_none(tmp_path):
    assert OrbitCache(tmp_path).load(1, 100) is None


def test_annotated_store(tmp_path, small_records):
    path = OrbitCache(tmp_path).store(-1, 300, small_records, annotate=True)
    lines = path.read_text(encoding='utf-8').splitlines()
    rows = [json.loads(line) for line in lines[1:]]
    field_23 = next(row for row in rows if row['disc'] == -23)
    assert field_23['maximal'] is True
    assert field_23['field_disc'] == -23


def test_header_mismatch(tmp_path, small_records):
    cache = OrbitCache(tmp_path)
    path = cache.store(-1, 300, small_records)
    lines = path.read_text(encoding='utf-8').splitlines()
    header = json.loads(lines[0])
    header['version'] = 999
    path.write_text('\n'.join([json.dumps(header)] + lines[1:]) + '\n', encoding='utf-8')
    with pytest.raises(CacheMismatchError):
        cache.load(-1, 300)


def test_count_mismatch(tmp_path, small_records):
    cache = OrbitCache(tmp_path)
    path = cache.store(-1, 300, small_records)
    lines = path.read_text(encoding='utf-8').splitlines()
    path.write_text('\n'.join(lines[:-1]) + '\n', encoding='utf-8')
    with pytest.raises(CacheMismatchError):
        cache.load(-1, 300)


def test_larger_cache_is_filtered(tmp_path, small_records):
    cache = OrbitCache(tmp_path)
    cache.store(-1, 300, small_records)
    records = cache.get_or_enumerate(-1, 100, workers=1)
    assert records == [r for r in small_records if abs(r.discriminant) < 100]
    assert not cache.path(-1, 100).exists()


def test_enumerates_when_missing(tmp_path):
    cache = OrbitCache(tmp_path)
    records = cache.get_or_enumerate(1, 150, workers=1)
    assert cache.path(1, 150).exists()
    assert records == list(enumerate_orbits(150, 1, workers=1))
