"""例外定義モジュール"""
from typing import Any, Dict, Iterable, Optional


class CubicFormsError(Exception):
    """ツールキット共通の基底例外"""


class ArithmeticOverflowError(CubicFormsError):
    """検査付き整数演算の範囲超過"""


class InvalidElementError(CubicFormsError):
    """可逆でない行列"""


class InvalidInputError(CubicFormsError):
    """入力形式が前提条件を満たさない"""


class InvalidRootError(CubicFormsError):
    """指定された根が条件を満たさない"""


class UnsupportedPrimeError(CubicFormsError):
    """閉じた式が存在しない素数"""


class ConfigurationError(CubicFormsError):
    """設定値の検証エラー"""


class InvalidTestFunctionError(CubicFormsError):
    """密度テスト関数の台が広すぎる"""


class CacheMismatchError(CubicFormsError):
    """キャッシュのバージョン・キー不一致"""


class PrecisionError(CubicFormsError):
    """数値誤差を保証できない"""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class PartialDataError(CubicFormsError):
    """必要なデータが欠けている"""

    def __init__(self, message: str, missing: Iterable[Any] = ()):
        super().__init__(message)
        self.missing = list(missing)
