"""局所構造モジュール（分解型・極大性・指数pの部分環と上環）"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from sympy import divisors, factorint, legendre_symbol
from sympy.polys.domains import ZZ
from sympy.polys.galoistools import gf_gcd, gf_pow_mod, gf_sub

from modules.forms import (
    BinaryCubicForm,
    GL2Element,
    OrbitRecord,
    _disc,
    act,
    discriminant,
    enumerate_orbits,
    is_irreducible,
    reduce_form,
    ring_multiply,
    stabilizer_order,
)
from utils.config import get_splitting_label
from utils.errors import InvalidInputError, InvalidRootError

logger = logging.getLogger(__name__)

Point = Tuple[int, int]

# これ以下の素数では P¹(F_p) を走査する
SCAN_LIMIT = 50


class SplittingType(str, Enum):
    """mod p での分解型"""
    SPLIT_111 = '111'
    PARTIAL_12 = '12'
    INERT_3 = '3'
    RAMIFIED_1_21 = '1^21'
    TOTALLY_RAMIFIED_1_3 = '1^3'
    ZERO_0 = '0'

    @property
    def label(self) -> str:
        return get_splitting_label(self.value)


# 軌道指示関数 C₁..C₆ の並び
ORBIT_ORDER = (
    SplittingType.ZERO_0,
    SplittingType.TOTALLY_RAMIFIED_1_3,
    SplittingType.RAMIFIED_1_21,
    SplittingType.SPLIT_111,
    SplittingType.PARTIAL_12,
    SplittingType.INERT_3,
)

_TYPE_BY_MULTIPLICITIES = {
    (3,): SplittingType.TOTALLY_RAMIFIED_1_3,
    (2, 1): SplittingType.RAMIFIED_1_21,
    (1, 1, 1): SplittingType.SPLIT_111,
    (1,): SplittingType.PARTIAL_12,
    (): SplittingType.INERT_3,
}


@dataclass(frozen=True)
class LocalRootData:
    """P¹(F_p) 上の根と重複度"""
    roots: Tuple[Tuple[Point, int], ...]
    omega: int
    omega_simple: int


@dataclass(frozen=True)
class MaximalizationResult:
    """極大化の結果（Δ(f) = index² · field_discriminant）"""
    maximal_form: BinaryCubicForm
    index: int
    field_discriminant: int


def mobius(n: int) -> int:
    """メビウス関数"""
    exponents = factorint(n).values()
    if any(e > 1 for e in exponents):
        return 0
    return -1 if len(exponents) % 2 else 1


def prime_factors(n: int) -> List[int]:
    return sorted(factorint(n))


def projective_points(p: int) -> List[Point]:
    """P¹(F_p) の点 [x:1] と [1:0]"""
    return [(x, 1) for x in range(p)] + [(1, 0)]


def normalize_point(alpha: Point, p: int) -> Point:
    x, y = alpha[0] % p, alpha[1] % p
    if y:
        return ((x * pow(y, -1, p)) % p, 1)
    if x == 0:
        raise InvalidRootError(f"P¹(F_{p}) の点ではありません: {alpha}")
    return (1, 0)


def to_infinity(alpha: Point) -> GL2Element:
    """第1行が α の行列（作用後の a' = f(α)）"""
    x0, y0 = alpha
    if y0 == 0:
        return GL2Element.identity()
    return GL2Element(x0, 1, -1, 0)


def to_zero(alpha: Point) -> GL2Element:
    """第2行が α の行列（作用後の d' = f(α)）"""
    x0, y0 = alpha
    if y0 == 0:
        return GL2Element(0, -1, 1, 0)
    return GL2Element(1, 0, x0, 1)


def _multiplicity_at_zero(g: BinaryCubicForm, p: int) -> int:
    """[0:1] での重複度（d, c, b の順に p で割り切れる個数）"""
    mult = 0
    for coef in (g.d, g.c, g.b):
        if coef % p:
            break
        mult += 1
    return mult


def splitting_type(f: BinaryCubicForm, p: int) -> Tuple[SplittingType, LocalRootData]:
    """P¹(F_p) を走査して分解型と根を求める"""
    if f.is_multiple_of(p):
        return SplittingType.ZERO_0, LocalRootData((), p + 1, 0)
    roots: List[Tuple[Point, int]] = []
    for x0 in range(p):
        if f(x0, 1) % p == 0:
            shifted = act(to_zero((x0, 1)), f)
            roots.append(((x0, 1), _multiplicity_at_zero(shifted, p)))
    if f.a % p == 0:
        mult = 0
        for coef in (f.a, f.b, f.c):
            if coef % p:
                break
            mult += 1
        roots.append(((1, 0), mult))
    pattern = tuple(sorted((m for _, m in roots), reverse=True))
    symbol = _TYPE_BY_MULTIPLICITIES[pattern]
    simple = sum(1 for _, m in roots if m == 1)
    return symbol, LocalRootData(tuple(roots), len(roots), simple)


def splitting_symbol(f: BinaryCubicForm, p: int) -> SplittingType:
    """分解型だけを求める（p ∤ Δ では有限体上の多項式 gcd を使う）"""
    a, b, c, d = (coef % p for coef in f.coefficients)
    if a == b == c == d == 0:
        return SplittingType.ZERO_0
    if p <= SCAN_LIMIT or _disc(a, b, c, d) % p == 0:
        return splitting_type(f, p)[0]
    if a == 0:
        # 無限遠は単純根、残りは二次式
        if legendre_symbol((c * c - 4 * b * d) % p, p) == 1:
            return SplittingType.SPLIT_111
        return SplittingType.PARTIAL_12
    poly = [ZZ(a), ZZ(b), ZZ(c), ZZ(d)]
    x = [ZZ(1), ZZ(0)]
    frobenius = gf_pow_mod(x, p, poly, p, ZZ)
    common = gf_gcd(gf_sub(frobenius, x, p, ZZ), poly, p, ZZ)
    count = len(common) - 1
    if count == 3:
        return SplittingType.SPLIT_111
    if count == 1:
        return SplittingType.PARTIAL_12
    return SplittingType.INERT_3


def omega(f: BinaryCubicForm, m: int) -> int:
    """P¹(Z/mZ) での根の個数（m は平方因子なし）"""
    return reduce(lambda acc, p: acc * splitting_type(f, p)[1].omega, prime_factors(m), 1)


def omega_simple(f: BinaryCubicForm, m: int) -> int:
    """単純根の個数"""
    return reduce(lambda acc, p: acc * splitting_type(f, p)[1].omega_simple, prime_factors(m), 1)


def _overring_condition(f: BinaryCubicForm, p: int, alpha: Point) -> bool:
    g = act(to_infinity(alpha), f)
    return g.a % (p * p) == 0 and g.b % p == 0


def qualifying_roots(f: BinaryCubicForm, p: int) -> List[Point]:
    """指数pの上環を与える根（p²|a', p|b' となる重根）"""
    if f.is_multiple_of(p):
        candidates = projective_points(p)
    else:
        candidates = [alpha for alpha, mult in splitting_type(f, p)[1].roots if mult >= 2]
    return [alpha for alpha in candidates if _overring_condition(f, p, alpha)]


def is_maximal_at(f: BinaryCubicForm, p: int) -> bool:
    """p で極大か"""
    disc = discriminant(f)
    if disc == 0:
        raise InvalidInputError(f"判別式0の形式: {f}")
    if disc % (p * p):
        return True
    if f.is_multiple_of(p):
        return False
    return not qualifying_roots(f, p)


def is_maximal(f: BinaryCubicForm) -> bool:
    """すべての素数で極大か"""
    disc = discriminant(f)
    return all(is_maximal_at(f, p) for p, e in factorint(abs(disc)).items() if e >= 2)


def overring_step(f: BinaryCubicForm, p: int, alpha: Point) -> BinaryCubicForm:
    """α での指数pの上環 (a'/p², b'/p, c', p·d')"""
    alpha = normalize_point(alpha, p)
    if alpha not in qualifying_roots(f, p):
        raise InvalidRootError(f"{alpha} は {f} の p={p} での条件を満たす根ではありません")
    g = act(to_infinity(alpha), f)
    return BinaryCubicForm(g.a // (p * p), g.b // p, g.c, p * g.d)


def subring(g: BinaryCubicForm, p: int, alpha: Point) -> BinaryCubicForm:
    """α での指数pの部分環 (a'/p, b', p·c', p²·d')"""
    alpha = normalize_point(alpha, p)
    if g(*alpha) % p:
        raise InvalidRootError(f"{alpha} は {g} の mod {p} の根ではありません")
    h = act(to_infinity(alpha), g)
    return BinaryCubicForm(h.a // p, h.b, p * h.c, p * p * h.d)


def index_p_subrings(g: BinaryCubicForm, p: int) -> List[BinaryCubicForm]:
    """指数pの部分環をすべて（根ごとに1つ）"""
    if g.is_multiple_of(p):
        points = projective_points(p)
    else:
        points = [alpha for alpha, _ in splitting_type(g, p)[1].roots]
    return [subring(g, p, alpha) for alpha in points]


def maximalize(f: BinaryCubicForm) -> MaximalizationResult:
    """上環を繰り返しとって極大形式・指数・体の判別式を求める"""
    if not is_irreducible(f):
        raise InvalidInputError(f"可約な形式は極大化できません: {f}")
    disc = discriminant(f)
    index = 1
    current = f
    for p, exponent in sorted(factorint(abs(disc)).items()):
        if exponent < 2:
            continue
        while True:
            if current.is_multiple_of(p):
                current = current.divide(p)
                index *= p * p
                continue
            roots = qualifying_roots(current, p)
            if not roots:
                break
            current = overring_step(current, p, roots[0])
            index *= p
    field_disc = disc // (index * index)
    return MaximalizationResult(reduce_form(current), index, field_disc)


def _in_lattice_mod(vector: Sequence[int], generator: Sequence[int], p: int, modulus: int, scale: int) -> bool:
    """vector ≡ scale·k·generator (mod modulus) となる k が存在するか"""
    return any(
        all((v - scale * k * w) % modulus == 0 for v, w in zip(vector, generator))
        for k in range(p)
    )


def count_index_p_subrings(f: BinaryCubicForm, p: int) -> int:
    """乗法表から直接数えた指数pの部分環の個数"""
    count = 0
    for u, v in projective_points(p):
        if v:
            t = (-u * pow(v, -1, p)) % p
            basis = ((0, 1, t), (0, 0, p))
        else:
            basis = ((0, p, 0), (0, 0, 1))
        closed = True
        for i in range(2):
            for j in range(i, 2):
                _, x, y = ring_multiply(f, basis[i], basis[j])
                if (u * x + v * y) % p:
                    closed = False
        count += closed
    return count


def count_index_p_overrings(f: BinaryCubicForm, p: int) -> int:
    """R + Z·w/p の形の上環を直接数える"""
    count = 0
    points = [(1, y, z) for y in range(p) for z in range(p)]
    points += [(0, 1, z) for z in range(p)] + [(0, 0, 1)]
    for w in points:
        square = ring_multiply(f, w, w)
        if not _in_lattice_mod(square, w, p, p * p, p):
            continue
        if all(_in_lattice_mod(ring_multiply(f, w, e), w, p, p, 1) for e in ((0, 1, 0), (0, 0, 1))):
            count += 1
    return count


def enumerate_suborders(f: BinaryCubicForm, Z: int) -> List[Tuple[int, int, int]]:
    """指数 Z 以下の部分整環を格子 ⟨1, h1ω + tθ, h2θ⟩ として列挙"""
    orders = []
    for n in range(1, Z + 1):
        for h1 in divisors(n):
            h2 = n // h1
            for t in range(h2):
                generators = ((0, h1, t), (0, 0, h2))
                closed = True
                for i in range(2):
                    for j in range(i, 2):
                        _, x, y = ring_multiply(f, generators[i], generators[j])
                        if x % h1 or (y - (x // h1) * t) % h2:
                            closed = False
                if closed:
                    orders.append((h1, t, h2))
    return orders


@dataclass(frozen=True)
class LocalWeight:
    """素数ごとに分解型の関数を掛け合わせた合同重み"""
    factors: Tuple[Tuple[int, Tuple[Tuple[SplittingType, Fraction], ...]], ...] = ()

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, Mapping[SplittingType, Fraction]]) -> 'LocalWeight':
        factors = []
        for p in sorted(mapping):
            values = mapping[p]
            factors.append((p, tuple((s, Fraction(values.get(s, 0))) for s in ORBIT_ORDER)))
        return cls(tuple(factors))

    @property
    def primes(self) -> List[int]:
        return [p for p, _ in self.factors]

    def at(self, p: int) -> Dict[SplittingType, Fraction]:
        for prime, values in self.factors:
            if prime == p:
                return dict(values)
        return {s: Fraction(1) for s in ORBIT_ORDER}

    def restrict(self, primes: Iterable[int]) -> 'LocalWeight':
        keep = set(primes)
        return LocalWeight(tuple(item for item in self.factors if item[0] in keep))

    def is_simple_at(self, p: int) -> bool:
        values = self.at(p)
        return values[SplittingType.TOTALLY_RAMIFIED_1_3] == values[SplittingType.ZERO_0]

    def __call__(self, f: BinaryCubicForm) -> Fraction:
        value = Fraction(1)
        for p, values in self.factors:
            value *= dict(values)[splitting_symbol(f, p)]
            if not value:
                break
        return value


def in_nonmaximal_set(f: BinaryCubicForm, q: int) -> bool:
    """f ∈ W_q（q の各素因子で非極大）か"""
    return all(not is_maximal_at(f, p) for p in prime_factors(q))


@dataclass
class SwitchingReport:
    """スイッチング恒等式の両辺"""
    q: int
    X: int
    sign: int
    lhs: Fraction
    rhs: Fraction
    pairs_checked: int = 0
    stabilizer_mismatches: int = 0
    notes: Dict[str, int] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs and self.stabilizer_mismatches == 0


def pair_stabilizer_order(f: BinaryCubicForm, p: int, g: BinaryCubicForm) -> int:
    """|Stab(g, α)|：f に対応する根 α を固定する Stab(g) の元の個数

    Stab(g) の α の軌道は、部分環が f と同値になる g の根全体と一致する。
    """
    target = reduce_form(f)
    orbit = sum(1 for h in index_p_subrings(g, p) if reduce_form(h) == target)
    if not orbit:
        raise InvalidRootError(f"{f} は {g} の p={p} での部分環ではありません")
    return stabilizer_order(g) // orbit


def _divisor_pairs(q: int) -> List[Tuple[int, int]]:
    """kℓ | q となる (k, ℓ)"""
    return [(k, m // k) for m in divisors(q) for k in divisors(m)]


def _records_for(X: int, sign: int, records: Optional[Sequence[OrbitRecord]]) -> List[OrbitRecord]:
    if records is None:
        records = list(enumerate_orbits(X, sign))
    return [r for r in records if 0 < sign * r.discriminant < X]


def switching_check(q: int, X: int, sign: int = 1,
                    records: Optional[Sequence[OrbitRecord]] = None) -> SwitchingReport:
    """W_q 上の和と、根の個数で重み付けた全軌道上の和を厳密に比較"""
    if mobius(q) == 0:
        raise InvalidInputError(f"q は平方因子なしである必要があります: {q}")
    pool = _records_for(X, sign, records)
    primes = prime_factors(q)
    report = SwitchingReport(q=q, X=X, sign=sign, lhs=Fraction(0), rhs=Fraction(0))
    for record in pool:
        f = record.form
        if not all(not is_maximal_at(f, p) for p in primes):
            continue
        report.lhs += Fraction(1, record.stabilizer_order)
        for p in primes:
            if f.is_multiple_of(p):
                continue
            overring = overring_step(f, p, qualifying_roots(f, p)[0])
            report.pairs_checked += 1
            if pair_stabilizer_order(f, p, overring) != record.stabilizer_order:
                report.stabilizer_mismatches += 1
    q4 = q**4
    for k, ell in _divisor_pairs(q):
        mu = mobius(ell)
        if not mu:
            continue
        for record in pool:
            if q4 * abs(record.discriminant) >= X * k * k:
                continue
            report.rhs += Fraction(mu * omega(record.form, k * ell), record.stabilizer_order)
    logger.info("スイッチング q=%d 符号=%+d: 左辺=%s 右辺=%s", q, sign, report.lhs, report.rhs)
    return report


def weighted_switching_check(q: int, weight: LocalWeight, X: int, sign: int = 1,
                             records: Optional[Sequence[OrbitRecord]] = None) -> SwitchingReport:
    """合同重み付きスイッチング恒等式（単純素数 d と残り e に分けた形）を厳密に比較"""
    if mobius(q) == 0:
        raise InvalidInputError(f"q は平方因子なしである必要があります: {q}")
    pool = _records_for(X, sign, records)
    shared = [p for p in prime_factors(q) if p in weight.primes]
    simple = [p for p in shared if weight.is_simple_at(p) and weight.at(p)[SplittingType.ZERO_0] == 0]
    d = reduce(lambda x, y: x * y, simple, 1)
    e = reduce(lambda x, y: x * y, (p for p in shared if p not in simple), 1)
    rest = q // (d * e)
    remaining = weight.restrict(p for p in weight.primes if p not in simple)
    report = SwitchingReport(q=q, X=X, sign=sign, lhs=Fraction(0), rhs=Fraction(0),
                             notes={'d': d, 'e': e})
    for record in pool:
        if in_nonmaximal_set(record.form, q):
            report.lhs += weight(record.form) / record.stabilizer_order
    factor = Fraction(1)
    for p in simple:
        factor *= weight.at(p)[SplittingType.RAMIFIED_1_21]
    total = Fraction(0)
    scale = d * d * rest**4
    for k, ell in _divisor_pairs(rest):
        mu = mobius(ell)
        if not mu:
            continue
        for record in pool:
            g = record.form
            if scale * abs(record.discriminant) >= X * k * k:
                continue
            if e > 1 and not in_nonmaximal_set(g, e):
                continue
            value = omega_simple(g, d) * omega(g, k * ell) * remaining(g)
            if value:
                total += Fraction(mu) * value / record.stabilizer_order
    report.rhs = factor * total
    logger.info("重み付きスイッチング q=%d d=%d e=%d: 左辺=%s 右辺=%s", q, d, e, report.lhs, report.rhs)
    return report
