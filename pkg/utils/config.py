"""設定管理モジュール"""
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Mapping, Optional, Tuple

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from utils.errors import ConfigurationError

CODE_VERSION = "1.0.0"
CACHE_SCHEMA_VERSION = 1

CONFIG_FILE_NAME = "cubicforms.toml"


@lru_cache(maxsize=None)
def _load_config_file(path: Optional[str] = None) -> Dict[str, Any]:
    """TOML設定ファイルを読み込む（存在しなければ空）"""
    candidate = Path(path or os.getenv('CUBICFORMS_CONFIG') or CONFIG_FILE_NAME)
    if not candidate.exists():
        return {}
    try:
        with open(candidate, 'rb') as f:
            return tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigurationError(f"設定ファイルを解析できません: {candidate}: {e}") from e


def _lookup(key: str, env_name: str, default: Any) -> Any:
    """環境変数 → 設定ファイル → 既定値の順で取得"""
    value = os.getenv(env_name)
    if value is not None:
        return value
    settings = _load_config_file()
    if key in settings:
        return settings[key]
    return default


def get_cache_dir() -> Path:
    """キャッシュディレクトリを取得"""
    return Path(_lookup('cache_dir', 'CUBICFORMS_CACHE_DIR', '.cubicforms_cache'))


def get_max_discriminant() -> int:
    """オーバーフロー安全な判別式上限"""
    return int(_lookup('max_disc', 'CUBICFORMS_MAX_DISC', 10**8))


def get_worker_count() -> int:
    """ワーカー数を取得"""
    return max(1, int(_lookup('workers', 'CUBICFORMS_WORKERS', 1)))


def get_log_level() -> str:
    """ログレベルを取得"""
    return str(_lookup('log_level', 'CUBICFORMS_LOG_LEVEL', 'INFO')).upper()


def get_coefficient_bound() -> int:
    """係数の上限（判別式計算が128ビットに収まる範囲）"""
    return int(_lookup('coefficient_bound', 'CUBICFORMS_COEFF_BOUND', 2**29))


# 検査付き演算の上限
INT128_LIMIT = 2**127

# 劣凸性指数 θ = 1/4 - 1/128（報告用の定数）
SUBCONVEXITY_THETA = Fraction(1, 4) - Fraction(1, 128)

SPLITTING_SYMBOLS = ('111', '12', '3', '1^21', '1^3')

SPLITTING_LABELS = {
    '111': '完全分解 (111)',
    '12': '部分分解 (12)',
    '3': '惰性 (3)',
    '1^21': '分岐 (1²1)',
    '1^3': '完全分岐 (1³)',
    '0': 'ゼロ (0)',
}

KERNEL_OPTIONS = {
    'constant': 'G(u) = 1',
    'cosine': 'G(u) = cos(πu/8)^(-2)',
    'gaussian': 'G(u) = exp(u²)',
}

SMOOTH_WEIGHT_OPTIONS = {
    'bump': 'exp(-1/(1-(2t-3)²)) を [1,2] 上で正規化',
    'sharp': '[1,2] の指示関数',
}

DENSITY_TEST_OPTIONS = {
    'fejer': 'Φ̂ は半幅 a の三角関数',
    'bump': 'Φ̂ は半幅 a の滑らかなバンプ',
}

QUADRATURE_DEFAULTS = {
    'step': 0.02,
    'height': 80.0,
    'abscissa_large': 1.5,
    'abscissa_small': -0.25,
    'log_y_min': -25.0,
    'log_y_max': 6.0,
    'log_y_step': 0.002,
}

E_SERIES_TERMS = 40


def get_kernel_options() -> Dict[str, str]:
    """AFEカーネル（G関数）の選択肢"""
    return KERNEL_OPTIONS


def get_smooth_weight_options() -> Dict[str, str]:
    """平滑化重み Ψ の選択肢"""
    return SMOOTH_WEIGHT_OPTIONS


def get_density_test_options() -> Dict[str, str]:
    """1レベル密度テスト関数の選択肢"""
    return DENSITY_TEST_OPTIONS


def get_quadrature_defaults() -> Dict[str, float]:
    """求積パラメータの既定値"""
    settings = _load_config_file().get('quadrature', {})
    merged = dict(QUADRATURE_DEFAULTS)
    merged.update({k: float(v) for k, v in settings.items() if k in QUADRATURE_DEFAULTS})
    return merged


def get_splitting_label(symbol: str) -> str:
    """分解型の表示ラベルを取得"""
    return SPLITTING_LABELS.get(symbol, symbol)


@dataclass(frozen=True)
class LocalSpec:
    """局所条件 Σ（無限素点の符号と素数ごとの許容分解型）"""
    sign: int = 1
    allowed: Tuple[Tuple[int, FrozenSet[str]], ...] = ()
    require_inert: bool = False

    def allowed_at(self, p: int) -> FrozenSet[str]:
        """素数 p で許容される分解型"""
        for prime, symbols in self.allowed:
            if prime == p:
                return symbols
        return frozenset(SPLITTING_SYMBOLS)

    def is_specified(self, p: int) -> bool:
        return any(prime == p for prime, _ in self.allowed)

    @property
    def primes(self) -> List[int]:
        return sorted(prime for prime, _ in self.allowed)

    def validate(self) -> 'LocalSpec':
        """局所条件を検証"""
        if self.sign not in (1, -1):
            raise ConfigurationError(f"符号は ±1 である必要があります: {self.sign}")
        for prime, symbols in self.allowed:
            if prime < 2 or any(prime % k == 0 for k in range(2, int(prime**0.5) + 1)):
                raise ConfigurationError(f"素数ではありません: {prime}")
            if not symbols:
                raise ConfigurationError(f"p={prime} の許容集合が空です")
            unknown = set(symbols) - set(SPLITTING_SYMBOLS)
            if unknown:
                raise ConfigurationError(f"未知の分解型: {sorted(unknown)}")
        if self.require_inert and not any(s == frozenset({'3'}) for _, s in self.allowed):
            raise ConfigurationError("惰性素数の指定が必要です")
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            'sign': self.sign,
            'allowed': {str(p): sorted(s) for p, s in self.allowed},
            'require_inert': self.require_inert,
        }


def parse_local_spec(text: str) -> LocalSpec:
    """文字列 'sign=-1;5:3;7:111,12' から局所条件を構築"""
    sign = 1
    require_inert = False
    allowed: Dict[int, FrozenSet[str]] = {}
    for part in filter(None, (chunk.strip() for chunk in (text or '').split(';'))):
        if part.startswith('sign='):
            try:
                sign = int(part[len('sign='):])
            except ValueError as e:
                raise ConfigurationError(f"符号を解釈できません: {part}") from e
        elif part == 'inert':
            require_inert = True
        elif ':' in part:
            prime_text, symbols_text = part.split(':', 1)
            try:
                prime = int(prime_text)
            except ValueError as e:
                raise ConfigurationError(f"素数を解釈できません: {part}") from e
            allowed[prime] = frozenset(s.strip() for s in symbols_text.split(',') if s.strip())
        else:
            raise ConfigurationError(f"局所条件の書式が不正です: {part}")
    return local_spec_from_mapping({'sign': sign, 'primes': allowed, 'require_inert': require_inert})


def local_spec_from_mapping(data: Mapping[str, Any]) -> LocalSpec:
    """辞書（TOMLの [sigma] テーブル）から局所条件を構築"""
    primes = data.get('primes', {}) or {}
    allowed = tuple(sorted(
        (int(p), frozenset(str(s) for s in symbols)) for p, symbols in primes.items()
    ))
    spec = LocalSpec(
        sign=int(data.get('sign', 1)),
        allowed=allowed,
        require_inert=bool(data.get('require_inert', False)),
    )
    return spec.validate()


def get_local_spec() -> LocalSpec:
    """設定ファイルの局所条件（なければ全許容・正符号）"""
    settings = _load_config_file().get('sigma')
    if settings:
        return local_spec_from_mapping(settings)
    return LocalSpec()


@dataclass
class RunConfig:
    """実行設定"""
    max_disc: int = 10**4
    signs: Tuple[int, ...] = (1, -1)
    local_spec: LocalSpec = field(default_factory=LocalSpec)
    kernel: str = 'constant'
    weight: str = 'bump'
    tolerance: float = 1e-8
    density_support: float = 1.0 / 3.0
    test_function: str = 'fejer'
    primes: Tuple[int, ...] = (5, 7, 11)
    cache_dir: Path = field(default_factory=get_cache_dir)
    output_dir: Path = Path('output')
    workers: int = field(default_factory=get_worker_count)
    disc_min: Optional[int] = None
    disc_max: Optional[int] = None

    def validate(self) -> 'RunConfig':
        """すべての項目を計算前に検証"""
        if self.max_disc < 1:
            raise ConfigurationError(f"判別式上限は正である必要があります: {self.max_disc}")
        if self.max_disc > get_max_discriminant():
            raise ConfigurationError(
                f"判別式上限 {self.max_disc} が安全上限 {get_max_discriminant()} を超えています"
            )
        if not self.signs or any(s not in (1, -1) for s in self.signs):
            raise ConfigurationError(f"符号は ±1 である必要があります: {self.signs}")
        if self.kernel not in KERNEL_OPTIONS:
            raise ConfigurationError(f"未知のカーネル: {self.kernel}")
        if self.weight not in SMOOTH_WEIGHT_OPTIONS:
            raise ConfigurationError(f"未知の重み関数: {self.weight}")
        if not 0 < self.tolerance < 1:
            raise ConfigurationError(f"許容誤差が不正です: {self.tolerance}")
        if not 0 < self.density_support <= 0.4:
            raise ConfigurationError(f"密度テスト関数の台は (0, 2/5] に収める必要があります: {self.density_support}")
        if self.test_function not in DENSITY_TEST_OPTIONS:
            raise ConfigurationError(f"未知のテスト関数: {self.test_function}")
        if self.workers < 1:
            raise ConfigurationError(f"ワーカー数が不正です: {self.workers}")
        lo, hi = self.disc_window
        if (self.disc_min, self.disc_max) != (None, None) and not 1 <= lo < hi <= get_max_discriminant():
            raise ConfigurationError(f"判別式の窓 [{lo}, {hi}) が不正です")
        self.local_spec.validate()
        return self

    @property
    def disc_window(self) -> Tuple[int, int]:
        """lvalue の対象 disc_min ≤ |Δ| < disc_max（未指定なら 1 と max_disc）"""
        lo = 1 if self.disc_min is None else self.disc_min
        hi = self.max_disc if self.disc_max is None else self.disc_max
        return (lo, hi)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['local_spec'] = self.local_spec.to_dict()
        data['signs'] = list(self.signs)
        data['primes'] = list(self.primes)
        data['cache_dir'] = str(self.cache_dir)
        data['output_dir'] = str(self.output_dir)
        # 出力のバイト一致に影響しない項目
        data.pop('workers')
        return data

    def config_hash(self) -> str:
        """設定のハッシュ値"""
        payload = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(payload.encode('utf-8')).hexdigest()[:16]
