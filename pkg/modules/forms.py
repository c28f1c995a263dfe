"""二元三次形式モジュール"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from sympy import divisors
from tqdm import tqdm

from utils.config import INT128_LIMIT, get_coefficient_bound, get_max_discriminant, get_worker_count
from utils.errors import (
    ArithmeticOverflowError,
    ConfigurationError,
    InvalidElementError,
    InvalidInputError,
    PrecisionError,
)
from utils.logging_setup import show_progress

logger = logging.getLogger(__name__)

# 基本領域の境界判定に使う許容幅
REDUCTION_SLACK = 1e-9
MAX_REDUCTION_STEPS = 10_000


def _checked(value: int) -> int:
    """128ビット符号付き整数に収まるか検査"""
    if -INT128_LIMIT <= value < INT128_LIMIT:
        return value
    raise ArithmeticOverflowError(f"128ビット整数の範囲を超えました: {value}")


@lru_cache(maxsize=1)
def _coefficient_bound() -> int:
    return get_coefficient_bound()


@dataclass(frozen=True, order=True)
class BinaryCubicForm:
    """整数二元三次形式 ax³ + bx²y + cxy² + dy³"""
    a: int
    b: int
    c: int
    d: int

    @property
    def coefficients(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x: int, y: int) -> int:
        return self.a * x**3 + self.b * x * x * y + self.c * x * y * y + self.d * y**3

    def is_zero(self) -> bool:
        return self.a == self.b == self.c == self.d == 0

    def is_multiple_of(self, n: int) -> bool:
        return all(coef % n == 0 for coef in self.coefficients)

    def divide(self, n: int) -> 'BinaryCubicForm':
        """係数を n で割る（割り切れる場合のみ）"""
        if not self.is_multiple_of(n):
            raise InvalidInputError(f"{self} は {n} の倍数ではありません")
        return BinaryCubicForm(*(coef // n for coef in self.coefficients))

    def scale(self, n: int) -> 'BinaryCubicForm':
        return BinaryCubicForm(*(_checked(coef * n) for coef in self.coefficients))

    def mod(self, n: int) -> 'BinaryCubicForm':
        return BinaryCubicForm(*(coef % n for coef in self.coefficients))

    def mirror(self) -> 'BinaryCubicForm':
        """diag(-1,1) による像 (a,-b,c,-d)"""
        return BinaryCubicForm(self.a, -self.b, self.c, -self.d)

    def __str__(self) -> str:
        return f"({self.a},{self.b},{self.c},{self.d})"


@dataclass(frozen=True)
class DualForm:
    """双対形式 a*x³ + 3b*x²y + 3c*xy² + d*y³ の係数 (a*, b*, c*, d*)"""
    a: int
    b: int
    c: int
    d: int

    @property
    def coefficients(self) -> Tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def integral_form(self) -> BinaryCubicForm:
        """V(Z) 内の古典的整数形式として見る"""
        return BinaryCubicForm(self.a, 3 * self.b, 3 * self.c, self.d)

    def mod(self, n: int) -> 'DualForm':
        return DualForm(*(coef % n for coef in self.coefficients))


@dataclass(frozen=True)
class GL2Element:
    """GL₂(Z) または GL₂(Z/nZ) の元 [[p, q], [r, s]]"""
    p: int
    q: int
    r: int
    s: int
    modulus: Optional[int] = None

    def __post_init__(self):
        det = self.p * self.s - self.q * self.r
        if self.modulus is None:
            if det not in (1, -1):
                raise InvalidElementError(f"GL₂(Z) の行列式は ±1 である必要があります: {det}")
        elif math.gcd(det % self.modulus, self.modulus) != 1:
            raise InvalidElementError(f"行列式 {det} は Z/{self.modulus}Z の単元ではありません")

    @property
    def det(self) -> int:
        det = self.p * self.s - self.q * self.r
        return det if self.modulus is None else det % self.modulus

    @property
    def entries(self) -> Tuple[int, int, int, int]:
        return (self.p, self.q, self.r, self.s)

    def __matmul__(self, other: 'GL2Element') -> 'GL2Element':
        p = self.p * other.p + self.q * other.r
        q = self.p * other.q + self.q * other.s
        r = self.r * other.p + self.s * other.r
        s = self.r * other.q + self.s * other.s
        modulus = self.modulus or other.modulus
        if modulus is not None:
            p, q, r, s = p % modulus, q % modulus, r % modulus, s % modulus
        return GL2Element(p, q, r, s, modulus)

    @classmethod
    def identity(cls, modulus: Optional[int] = None) -> 'GL2Element':
        return cls(1, 0, 0, 1, modulus)


SWAP = GL2Element(0, 1, 1, 0)
INVERSION = GL2Element(0, 1, -1, 0)


def translation(k: int) -> GL2Element:
    """根を z ↦ z - k と動かす行列 [[1,0],[k,1]]"""
    return GL2Element(1, 0, k, 1)


def _poly_mul(u: Sequence[int], v: Sequence[int]) -> List[int]:
    out = [0] * (len(u) + len(v) - 1)
    for i, x in enumerate(u):
        for j, y in enumerate(v):
            out[i + j] += x * y
    return out


def _substitute(coeffs: Sequence[int], p: int, q: int, r: int, s: int) -> List[int]:
    """f(px + ry, qx + sy) の係数"""
    first = (p, r)
    second = (q, s)
    first_sq = _poly_mul(first, first)
    second_sq = _poly_mul(second, second)
    monomials = (
        _poly_mul(first_sq, first),
        _poly_mul(first_sq, second),
        _poly_mul(first, second_sq),
        _poly_mul(second_sq, second),
    )
    out = [0, 0, 0, 0]
    for coef, monomial in zip(coeffs, monomials):
        if coef:
            for i in range(4):
                out[i] += coef * monomial[i]
    return out


def _twist(coeffs: Sequence[int], gamma: GL2Element) -> Tuple[int, int, int, int]:
    """det(γ)^(-1) を掛ける"""
    if gamma.modulus is None:
        det = gamma.det
        return tuple(_checked(det * coef) for coef in coeffs)  # type: ignore[return-value]
    n = gamma.modulus
    inverse = pow(gamma.det, -1, n)
    return tuple((inverse * coef) % n for coef in coeffs)  # type: ignore[return-value]


def act(gamma: GL2Element, f: BinaryCubicForm) -> BinaryCubicForm:
    """捻られた作用 det(γ)^(-1) f((x,y)γ)"""
    coeffs = _substitute(f.coefficients, *gamma.entries)
    return BinaryCubicForm(*_twist(coeffs, gamma))


def act_dual(gamma: GL2Element, f_star: DualForm) -> DualForm:
    """双対空間への作用（ペアリングが相対不変になるもの）"""
    g0, g1, g2, g3 = _substitute(f_star.integral_form().coefficients, *gamma.entries)
    # 中間係数は3で割り切れる
    return DualForm(*_twist((g0, g1 // 3, g2 // 3, g3), gamma))


def _disc(a: int, b: int, c: int, d: int) -> int:
    return b * b * c * c - 4 * a * c**3 - 4 * b**3 * d - 27 * a * a * d * d + 18 * a * b * c * d


def discriminant(f: BinaryCubicForm) -> int:
    """判別式 b²c² - 4ac³ - 4b³d - 27a²d² + 18abcd"""
    bound = _coefficient_bound()
    if any(abs(coef) > bound for coef in f.coefficients):
        raise ArithmeticOverflowError(f"係数が上限 {bound} を超えています: {f}")
    return _checked(_disc(*f.coefficients))


def dual_discriminant(f_star: DualForm) -> int:
    """双対判別式 Δ_*"""
    a, b, c, d = f_star.coefficients
    return 3 * b * b * c * c + 6 * a * b * c * d - 4 * a * c**3 - 4 * b**3 * d - a * a * d * d


def dual_pairing(f: BinaryCubicForm, f_star: DualForm, n: Optional[int] = None) -> int:
    """ペアリング [f, f*] = d·a* - c·b* + b·c* - a·d*"""
    value = f.d * f_star.a - f.c * f_star.b + f.b * f_star.c - f.a * f_star.d
    return value if n is None else value % n


def hessian(f: BinaryCubicForm) -> Tuple[int, int, int]:
    """ヘッセ共変量 (P, Q, R)。4PR - Q² = 3Δ"""
    a, b, c, d = f.coefficients
    return (b * b - 3 * a * c, b * c - 9 * a * d, c * c - 3 * b * d)


def ring_multiply(f: BinaryCubicForm, u: Sequence[int], v: Sequence[int]) -> Tuple[int, int, int]:
    """R_f の基底 ⟨1, ω, θ⟩ での積"""
    a, b, c, d = f.coefficients
    z1, x1, y1 = u
    z2, x2, y2 = v
    xx, xy, yy = x1 * x2, x1 * y2 + x2 * y1, y1 * y2
    # ωθ = -ad, ω² = -ac + bω - aθ, θ² = -bd + dω - cθ
    z = z1 * z2 - a * c * xx - a * d * xy - b * d * yy
    x = z1 * x2 + z2 * x1 + b * xx + d * yy
    y = z1 * y2 + z2 * y1 - a * xx - c * yy
    return (z, x, y)


def covariant_point(f: BinaryCubicForm) -> complex:
    """Δ<0 の形式の複素根（虚部正）"""
    a, b, c, d = f.coefficients
    if a == 0:
        if b == 0:
            raise InvalidInputError(f"複素根がありません: {f}")
        gap = 4 * b * d - c * c
        if gap <= 0:
            raise InvalidInputError(f"複素根がありません: {f}")
        return complex(-c / (2 * b), math.sqrt(gap) / (2 * abs(b)))
    roots = np.roots([a, b, c, d])
    root = roots[int(np.argmax(roots.imag))]
    if root.imag <= 0:
        raise InvalidInputError(f"複素根がありません: {f}")
    return complex(root)


def _is_reduced(f: BinaryCubicForm, disc: int) -> bool:
    if disc > 0:
        P, Q, R = hessian(f)
        return abs(Q) <= P <= R
    if disc < 0:
        omega = covariant_point(f)
        return abs(omega.real) <= 0.5 + REDUCTION_SLACK and abs(omega) ** 2 >= 1 - REDUCTION_SLACK
    return False


def is_reduced(f: BinaryCubicForm) -> bool:
    """被約判定（Δ>0 はヘッセ形式、Δ<0 は複素根が基本領域にあるか）"""
    return _is_reduced(f, discriminant(f))


def _sign_normalized(coeffs: Sequence[int]) -> bool:
    for coef in coeffs:
        if coef:
            return coef > 0
    return False


@lru_cache(maxsize=1)
def small_matrices() -> Tuple[GL2Element, ...]:
    """成分が {-1,0,1} の GL₂(Z) の元すべて"""
    elements = []
    for p, q, r, s in product((-1, 0, 1), repeat=4):
        if p * s - q * r in (1, -1):
            elements.append(GL2Element(p, q, r, s))
    return tuple(elements)


def _canonical_of_reduced(g: BinaryCubicForm, disc: int) -> BinaryCubicForm:
    """被約形式の小行列像のうち辞書式最小のもの"""
    candidates = []
    for gamma in small_matrices():
        image = act(gamma, g)
        if _sign_normalized(image.coefficients) and _is_reduced(image, disc):
            candidates.append(image)
    if not candidates:
        raise PrecisionError(f"被約像が見つかりません: {g}", {'disc': disc})
    return min(candidates)


def _count_stabilizer(g: BinaryCubicForm) -> int:
    return sum(1 for gamma in small_matrices() if act(gamma, g) == g)


def _reduce_raw(f: BinaryCubicForm, disc: int) -> BinaryCubicForm:
    g = f
    for _ in range(MAX_REDUCTION_STEPS):
        if disc > 0:
            P, Q, R = hessian(g)
            if abs(Q) > P:
                g = act(translation(-((Q + P) // (2 * P))), g)
            elif P > R:
                g = act(INVERSION, g)
            else:
                return g
        else:
            omega = covariant_point(g)
            if abs(omega.real) > 0.5 + REDUCTION_SLACK:
                g = act(translation(round(omega.real)), g)
            elif abs(omega) ** 2 < 1 - REDUCTION_SLACK:
                g = act(INVERSION, g)
            else:
                return g
    raise PrecisionError(f"簡約が収束しません: {f}", {'disc': disc, 'steps': MAX_REDUCTION_STEPS})


def reduce_form(f: BinaryCubicForm) -> BinaryCubicForm:
    """GL₂(Z) 軌道の標準代表元を返す"""
    if f.is_zero():
        raise InvalidInputError("ゼロ形式は簡約できません")
    disc = discriminant(f)
    if disc == 0:
        raise InvalidInputError(f"判別式0の形式は簡約できません: {f}")
    return _canonical_of_reduced(_reduce_raw(f, disc), disc)


def are_equivalent(f: BinaryCubicForm, g: BinaryCubicForm) -> bool:
    """GL₂(Z) 同値判定"""
    return reduce_form(f) == reduce_form(g)


def stabilizer_order(f: BinaryCubicForm) -> int:
    """捻られた作用での GL₂(Z) 固定部分群の位数"""
    return _count_stabilizer(reduce_form(f))


def is_irreducible(f: BinaryCubicForm) -> bool:
    """Q 上で一次因子を持たないか"""
    if f.is_zero():
        raise InvalidInputError("ゼロ形式の既約性は定義されません")
    a, b, c, d = f.coefficients
    if a == 0 or d == 0 or _disc(a, b, c, d) == 0:
        return False
    for root in np.roots([a, b, c, d]):
        if abs(root.imag) > 1e-6 * max(1.0, abs(root)):
            continue
        for q in divisors(abs(a)):
            center = round(root.real * q)
            if any(f(p, q) == 0 for p in (center - 1, center, center + 1)):
                return False
    return True


@dataclass(frozen=True)
class OrbitRecord:
    """軌道代表元のレコード"""
    form: BinaryCubicForm
    discriminant: int
    stabilizer_order: int
    irreducible: bool

    def sort_key(self) -> Tuple[int, Tuple[int, int, int, int]]:
        return (abs(self.discriminant), self.form.coefficients)

    def to_dict(self) -> Dict[str, Any]:
        a, b, c, d = self.form.coefficients
        return {
            'a': a, 'b': b, 'c': c, 'd': d,
            'disc': self.discriminant,
            'stab': self.stabilizer_order,
            'irreducible': self.irreducible,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'OrbitRecord':
        return cls(
            form=BinaryCubicForm(int(data['a']), int(data['b']), int(data['c']), int(data['d'])),
            discriminant=int(data['disc']),
            stabilizer_order=int(data['stab']),
            irreducible=bool(data['irreducible']),
        )


def _strictly_interior(g: BinaryCubicForm, disc: int) -> bool:
    if disc > 0:
        P, Q, R = hessian(g)
        return abs(Q) < P < R
    omega = covariant_point(g)
    u = abs(omega.real)
    return REDUCTION_SLACK < u < 0.5 - REDUCTION_SLACK and abs(omega) ** 2 > 1 + REDUCTION_SLACK


def _emit(g: BinaryCubicForm, disc: int) -> Optional[OrbitRecord]:
    """被約で符号正規化された候補が標準代表元ならレコードを返す"""
    if _strictly_interior(g, disc):
        mirror = g.mirror() if g.a else g.mirror().scale(-1)
        if g.coefficients > mirror.coefficients:
            return None
        if g != mirror:
            return OrbitRecord(g, disc, 1, is_irreducible(g))
    if _canonical_of_reduced(g, disc) != g:
        return None
    return OrbitRecord(g, disc, _count_stabilizer(g), is_irreducible(g))


def _positive_candidates(X: int, a: int) -> Iterator[Tuple[BinaryCubicForm, int]]:
    root_x = math.sqrt(X)
    if a == 0:
        b_max = int(X ** 0.25) + 1
        for b in range(1, b_max + 1):
            for c in range(-b, b + 1):
                d_lo = (c * c * b * b - X) // (4 * b**3)
                d_hi = (c * c - b * b) // (3 * b)
                for d in range(d_lo, d_hi + 1):
                    yield BinaryCubicForm(0, b, c, d), _disc(0, b, c, d)
        return
    inner = 4 * root_x - 27 * a * a
    if inner < 0:
        return
    b_max = int((3 * a + math.sqrt(inner)) / 2) + 1
    for b in range(-b_max, b_max + 1):
        c_lo = math.floor((b * b - root_x) / (3 * a))
        c_hi = min((b * b - 1) // (3 * a), abs(b) - 3 * a)
        for c in range(c_lo, c_hi + 1):
            P = b * b - 3 * a * c
            if P <= 0 or P * P >= X:
                continue
            bc = b * c
            for d in range(-((P - bc) // (9 * a)), (bc + P) // (9 * a) + 1):
                yield BinaryCubicForm(a, b, c, d), _disc(a, b, c, d)


def _negative_candidates(X: int, a: int) -> Iterator[Tuple[BinaryCubicForm, int]]:
    if a == 0:
        b_max = int((X / 3) ** 0.25) + 1
        for b in range(1, b_max + 1):
            for c in range(-b, b + 1):
                d_hi = int((X / (b * b) + c * c) / (4 * b)) + 1
                for d in range(b, d_hi + 1):
                    yield BinaryCubicForm(0, b, c, d), _disc(0, b, c, d)
        return
    v_max = (X / (4 * a**4)) ** (1 / 6)
    t_max = 0.5 + (X / (3 * a**4)) ** 0.25
    b_max = int(a * (t_max + 1.5)) + 1
    c_max = int(a * (t_max + 0.75 + v_max * v_max)) + 1
    lead = 27 * a * a
    for b in range(-b_max, b_max + 1):
        for c in range(-c_max, c_max + 1):
            # Δ(d) = -27a²d² + Bd + C
            B = 18 * a * b * c - 4 * b**3
            C = b * b * c * c - 4 * a * c**3
            gap = B * B + 4 * lead * (C + X)
            if gap < 0:
                continue
            root = math.isqrt(gap) + 1
            d_lo = (B - root) // (2 * lead)
            d_hi = -((-(B + root)) // (2 * lead))
            for d in range(d_lo, d_hi + 1):
                yield BinaryCubicForm(a, b, c, d), _disc(a, b, c, d)


def _leading_coefficient_max(X: int, sign: int) -> int:
    if sign > 0:
        return int(math.sqrt(4 * math.sqrt(X) / 27)) + 1
    return int((16 * X / 27) ** 0.25) + 1


def _enumerate_shard(task: Tuple[int, int, int]) -> List[OrbitRecord]:
    """先頭係数 a を固定した部分範囲を列挙"""
    X, sign, a = task
    candidates = _positive_candidates(X, a) if sign > 0 else _negative_candidates(X, a)
    records = []
    for g, disc in candidates:
        if not 0 < sign * disc < X:
            continue
        if not _is_reduced(g, disc):
            continue
        record = _emit(g, disc)
        if record is not None:
            records.append(record)
    return records


def enumerate_orbits(X: int, sign: int, workers: Optional[int] = None) -> Iterator[OrbitRecord]:
    """0 < ±Δ < X の GL₂(Z) 軌道代表元を |Δ|・係数順に列挙"""
    if sign not in (1, -1):
        raise ConfigurationError(f"符号は ±1 である必要があります: {sign}")
    if X < 1 or X > get_max_discriminant():
        raise ConfigurationError(f"判別式上限 {X} は安全範囲 [1, {get_max_discriminant()}] の外です")
    workers = workers or get_worker_count()
    tasks = [(X, sign, a) for a in range(_leading_coefficient_max(X, sign) + 1)]
    logger.info("軌道を列挙: X=%s 符号=%+d 分割数=%d ワーカー=%d", X, sign, len(tasks), workers)
    records: List[OrbitRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            for shard in tqdm(executor.map(_enumerate_shard, tasks), total=len(tasks),
                              disable=not show_progress(), desc=f"enumerate {sign:+d}"):
                records.extend(shard)
    else:
        for task in tqdm(tasks, disable=not show_progress(), desc=f"enumerate {sign:+d}"):
            records.extend(_enumerate_shard(task))
    records.sort(key=OrbitRecord.sort_key)
    logger.info("軌道数: %d", len(records))
    yield from records
