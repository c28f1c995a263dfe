"""結果データ処理モジュール"""
import json
import logging
import math
import time
from dataclasses import asdict, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from modules.forms import OrbitRecord
from utils.config import CODE_VERSION, RunConfig

logger = logging.getLogger(__name__)

ORBIT_COLUMNS = ['a', 'b', 'c', 'd', 'disc', 'stab', 'irreducible']
FLOAT_FORMAT = '%.12g'


class ResultProcessor:
    """結果テーブルとマニフェストの書き出し"""

    @staticmethod
    def orbits_to_frame(records: Iterable[OrbitRecord]) -> pd.DataFrame:
        """軌道レコードを |Δ| と係数で並べた DataFrame に"""
        rows = [record.to_dict() for record in sorted(records, key=lambda r: r.sort_key())]
        return pd.DataFrame(rows, columns=ORBIT_COLUMNS)

    @staticmethod
    def to_frame(rows: Sequence[Mapping[str, Any]], columns: Optional[List[str]] = None,
                 sort_by: Optional[List[str]] = None) -> pd.DataFrame:
        """辞書のリストを列順固定の DataFrame に"""
        if not rows:
            return pd.DataFrame(columns=columns or [])
        df = pd.DataFrame([{k: ResultProcessor.to_plain(v) for k, v in row.items()} for row in rows])
        if columns:
            df = df.reindex(columns=columns)
        if sort_by:
            df = df.sort_values(sort_by, kind='mergesort').reset_index(drop=True)
        return df

    @staticmethod
    def to_plain(value: Any) -> Any:
        """JSON に書ける値へ変換（有理数は文字列のまま保つ）"""
        if isinstance(value, Fraction):
            return str(value)
        if isinstance(value, (np.integer,)):
            return int(value)
        if isinstance(value, (np.floating,)):
            return float(value)
        if isinstance(value, np.bool_):
            return bool(value)
        if isinstance(value, complex):
            return [value.real, value.imag]
        if isinstance(value, Path):
            return str(value)
        if is_dataclass(value) and not isinstance(value, type):
            return {k: ResultProcessor.to_plain(v) for k, v in asdict(value).items()}
        if isinstance(value, Mapping):
            return {str(k): ResultProcessor.to_plain(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ResultProcessor.to_plain(v) for v in value]
        return value

    @staticmethod
    def write_csv(df: pd.DataFrame, path: Path) -> Path:
        """浮動小数の書式を固定して CSV を書き出す"""
        path.parent.mkdir(parents=True, exist_ok=True)
        df.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        logger.info("CSV を書き出しました: %s (%d 行)", path, len(df))
        return path

    @staticmethod
    def write_json(data: Mapping[str, Any], path: Path) -> Path:
        """キーを並べ替えて JSON を書き出す"""
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(ResultProcessor.to_plain(data), f, sort_keys=True, ensure_ascii=False, indent=2)
            f.write('\n')
        return path

    @staticmethod
    def write_manifest(output_dir: Path, command: str, config: RunConfig, started: float,
                       extra: Optional[Mapping[str, Any]] = None) -> Path:
        """manifest.json（コマンド, 設定, 設定ハッシュ, バージョン, 実行時間）"""
        manifest = {
            'command': command,
            'config': config.to_dict(),
            'config_hash': config.config_hash(),
            'code_version': CODE_VERSION,
            'wall_time': round(time.time() - started, 3),
        }
        if extra:
            manifest.update(extra)
        return ResultProcessor.write_json(manifest, output_dir / 'manifest.json')

    @staticmethod
    def relative_error(value: float, reference: float) -> float:
        """相対誤差（参照値が0なら絶対誤差）"""
        if reference == 0 or not math.isfinite(reference):
            return abs(value - reference)
        return abs(value - reference) / abs(reference)

    @staticmethod
    def format_number(value: float, digits: int = 6) -> str:
        """数値をフォーマット"""
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return 'N/A'
        if value != 0 and (abs(value) >= 1e6 or abs(value) < 1e-4):
            return f"{value:.{digits}e}"
        return f"{value:.{digits}f}"

    @staticmethod
    def format_percentage(value: float, decimals: int = 2) -> str:
        """パーセンテージをフォーマット"""
        if value is None or math.isnan(value):
            return 'N/A'
        return f"{value * 100:.{decimals}f}%"

    @staticmethod
    def summarize(checks: Mapping[str, bool]) -> Dict[str, Any]:
        """検査結果の合否をまとめる"""
        failed = sorted(name for name, ok in checks.items() if not ok)
        return {'passed': len(checks) - len(failed), 'failed': failed, 'ok': not failed}
