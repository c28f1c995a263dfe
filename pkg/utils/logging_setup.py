"""ログ設定モジュール"""
import logging
import sys
from typing import Optional

from utils.config import get_log_level

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def setup_logging(level: Optional[str] = None) -> None:
    """ルートロガーにストリームハンドラを1つだけ設定"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.setLevel((level or get_log_level()).upper())


def show_progress() -> bool:
    """端末に接続されているときだけ進捗バーを表示"""
    return sys.stderr.isatty() and logging.getLogger().isEnabledFor(logging.INFO)
