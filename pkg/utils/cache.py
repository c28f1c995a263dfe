"""軌道キャッシュモジュール（JSON Lines）"""
import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from modules.forms import OrbitRecord, enumerate_orbits
from modules.local import maximalize
from utils.config import CACHE_SCHEMA_VERSION, get_cache_dir
from utils.errors import CacheMismatchError

logger = logging.getLogger(__name__)


class OrbitCache:
    """符号と判別式上限ごとの軌道代表元キャッシュ"""

    def __init__(self, cache_dir: Optional[Path] = None):
        self.cache_dir = Path(cache_dir or get_cache_dir())

    def path(self, sign: int, X: int) -> Path:
        label = 'pos' if sign > 0 else 'neg'
        return self.cache_dir / f"orbits_{label}_{X}_v{CACHE_SCHEMA_VERSION}.jsonl"

    def load(self, sign: int, X: int) -> Optional[List[OrbitRecord]]:
        """キャッシュを読み込む（なければ None）"""
        path = self.path(sign, X)
        if not path.exists():
            return None
        with open(path, 'r', encoding='utf-8') as f:
            header = json.loads(f.readline() or '{}')
            expected = {'version': CACHE_SCHEMA_VERSION, 'sign': sign, 'X': X}
            mismatched = {k: header.get(k) for k, v in expected.items() if header.get(k) != v}
            if mismatched:
                raise CacheMismatchError(f"キャッシュのヘッダが一致しません: {path}: {mismatched}")
            records = [OrbitRecord.from_dict(json.loads(line)) for line in f if line.strip()]
        if len(records) != header.get('count'):
            raise CacheMismatchError(f"キャッシュの件数が一致しません: {path}: {len(records)} != {header.get('count')}")
        logger.info("キャッシュを読み込みました: %s (%d 件)", path, len(records))
        return records

    def store(self, sign: int, X: int, records: Sequence[OrbitRecord], annotate: bool = False) -> Path:
        """キャッシュを書き出す（annotate で極大性・指数・体の判別式も記録）"""
        path = self.path(sign, X)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix('.tmp')
        with open(tmp, 'w', encoding='utf-8') as f:
            header = {'version': CACHE_SCHEMA_VERSION, 'sign': sign, 'X': X, 'count': len(records)}
            f.write(json.dumps(header, sort_keys=True) + '\n')
            for record in records:
                data = record.to_dict()
                if annotate and record.irreducible:
                    result = maximalize(record.form)
                    data.update({
                        'maximal': result.index == 1,
                        'index': result.index,
                        'field_disc': result.field_discriminant,
                    })
                f.write(json.dumps(data, sort_keys=True) + '\n')
        tmp.replace(path)
        return path

    def _covering(self, sign: int, X: int) -> Optional[int]:
        """X 以上で最小の既存キャッシュの上限"""
        label = 'pos' if sign > 0 else 'neg'
        candidates = []
        for path in self.cache_dir.glob(f"orbits_{label}_*_v{CACHE_SCHEMA_VERSION}.jsonl"):
            try:
                bound = int(path.stem.split('_')[2])
            except (IndexError, ValueError):
                continue
            if bound >= X:
                candidates.append(bound)
        return min(candidates) if candidates else None

    def get_or_enumerate(self, sign: int, X: int, workers: Optional[int] = None) -> List[OrbitRecord]:
        """キャッシュがあれば使い、なければ列挙して保存"""
        bound = self._covering(sign, X)
        if bound is not None:
            records = self.load(sign, bound) or []
            return [r for r in records if abs(r.discriminant) < X]
        records = list(enumerate_orbits(X, sign, workers))
        self.store(sign, X, records)
        return records
