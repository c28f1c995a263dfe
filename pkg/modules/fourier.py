"""V(F_p) 上のフーリエ変換モジュール"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Mapping, Optional, Tuple

from sympy import isprime

from modules.artin import lambda_local, theta_local
from modules.forms import BinaryCubicForm, DualForm, GL2Element, _disc, act_dual, dual_pairing
from modules.local import ORBIT_ORDER, LocalWeight, SplittingType, is_maximal_at, splitting_symbol
from utils.errors import InvalidInputError, UnsupportedPrimeError

logger = logging.getLogger(__name__)

STANDARD_LABELS = tuple(s.value for s in ORBIT_ORDER)

Coefficients = Tuple[int, int, int, int]


@dataclass(frozen=True)
class InvariantFunction:
    """GL₂(F_p) 不変関数（軌道ごとの値）"""
    values: Tuple[Fraction, ...]
    labels: Tuple[str, ...] = STANDARD_LABELS

    def __post_init__(self):
        if len(self.values) != len(self.labels):
            raise InvalidInputError(f"値の個数 {len(self.values)} がラベル数 {len(self.labels)} と一致しません")

    @classmethod
    def from_mapping(cls, mapping: Mapping, labels: Tuple[str, ...] = STANDARD_LABELS) -> 'InvariantFunction':
        keyed = {str(getattr(k, 'value', k)): Fraction(v) for k, v in mapping.items()}
        unknown = set(keyed) - set(labels)
        if unknown:
            raise InvalidInputError(f"未知の軌道ラベル: {sorted(unknown)}")
        return cls(tuple(keyed.get(label, Fraction(0)) for label in labels), labels)

    @classmethod
    def indicator(cls, label, labels: Tuple[str, ...] = STANDARD_LABELS) -> 'InvariantFunction':
        return cls.from_mapping({label: 1}, labels)

    @classmethod
    def constant(cls, value, labels: Tuple[str, ...] = STANDARD_LABELS) -> 'InvariantFunction':
        return cls(tuple(Fraction(value) for _ in labels), labels)

    def __getitem__(self, label) -> Fraction:
        return self.values[self.labels.index(str(getattr(label, 'value', label)))]

    def __add__(self, other: 'InvariantFunction') -> 'InvariantFunction':
        self._check_labels(other)
        return InvariantFunction(tuple(x + y for x, y in zip(self.values, other.values)), self.labels)

    def __sub__(self, other: 'InvariantFunction') -> 'InvariantFunction':
        return self + other.scale(-1)

    def scale(self, factor) -> 'InvariantFunction':
        return InvariantFunction(tuple(Fraction(factor) * x for x in self.values), self.labels)

    def _check_labels(self, other: 'InvariantFunction') -> None:
        if self.labels != other.labels:
            raise InvalidInputError("軌道ラベルが一致しません")

    def items(self) -> Iterable[Tuple[str, Fraction]]:
        return zip(self.labels, self.values)

    def as_dict(self) -> Dict[str, str]:
        return {label: str(value) for label, value in self.items()}

    @property
    def sup_norm(self) -> Fraction:
        return max(abs(x) for x in self.values)

    def __call__(self, f: BinaryCubicForm, p: int) -> Fraction:
        return self[splitting_symbol(f, p)]

    def to_local_weight(self, p: int) -> LocalWeight:
        """素数 p の局所重みに変換"""
        if self.labels != STANDARD_LABELS:
            raise InvalidInputError("双対軌道上の関数は局所重みに変換できません")
        return LocalWeight.from_mapping({p: {s: self[s] for s in ORBIT_ORDER}})

    @classmethod
    def from_local_weight(cls, weight: LocalWeight, p: int) -> 'InvariantFunction':
        values = weight.at(p)
        return cls(tuple(values[s] for s in ORBIT_ORDER))


@dataclass(frozen=True)
class DualOrbit:
    """V*(F_p) の GL₂(F_p) 軌道"""
    label: str
    representative: DualForm
    size: int


@dataclass(frozen=True)
class MoriMatrix:
    """m_ij = 軌道 O_j の指示関数の変換の O*_i 上の値"""
    p: int
    entries: Tuple[Tuple[Fraction, ...], ...]
    row_labels: Tuple[str, ...]
    column_labels: Tuple[str, ...] = STANDARD_LABELS

    def __getitem__(self, index: Tuple[int, int]) -> Fraction:
        i, j = index
        return self.entries[i][j]

    def row(self, i: int) -> Tuple[Fraction, ...]:
        return self.entries[i]

    def column(self, j: int) -> Tuple[Fraction, ...]:
        return tuple(row[j] for row in self.entries)

    def apply(self, phi: InvariantFunction) -> InvariantFunction:
        if phi.labels != self.column_labels:
            raise InvalidInputError("関数のラベルが行列の列と一致しません")
        values = tuple(sum((m * x for m, x in zip(row, phi.values)), Fraction(0)) for row in self.entries)
        return InvariantFunction(values, self.row_labels)


def _require_prime(p: int) -> None:
    if not isprime(p):
        raise InvalidInputError(f"素数ではありません: {p}")


def orbit_sizes(p: int) -> Dict[SplittingType, int]:
    """V(F_p) の軌道の大きさ"""
    _require_prime(p)
    base = p * (p + 1) * (p - 1) ** 2
    return {
        SplittingType.ZERO_0: 1,
        SplittingType.TOTALLY_RAMIFIED_1_3: p * p - 1,
        SplittingType.RAMIFIED_1_21: p * (p * p - 1),
        SplittingType.SPLIT_111: base // 6,
        SplittingType.PARTIAL_12: base // 2,
        SplittingType.INERT_3: base // 3,
    }


def mori_matrix(p: int) -> MoriMatrix:
    """閉じた式による変換行列（p ≠ 3）"""
    _require_prime(p)
    if p == 3:
        raise UnsupportedPrimeError("p = 3 では閉じた式は使えません（brute_force_ft を使用）")
    e = 1 if p % 3 == 1 else -1
    F = Fraction
    rows = [
        (1, (p + 1) * (p - 1), p * (p + 1) * (p - 1), F(p * (p + 1) * (p - 1) ** 2, 6),
         F(p * (p + 1) * (p - 1) ** 2, 2), F(p * (p + 1) * (p - 1) ** 2, 3)),
        (1, -1, p * (p - 1), F(p * (p - 1) * (2 * p - 1), 6), F(-p * (p - 1), 2), F(-p * (p + 1) * (p - 1), 3)),
        (1, p - 1, p * (p - 2), F(-p * (p - 1), 2), F(-p * (p - 1), 2), 0),
        (1, 2 * p - 1, -3 * p, F(p * (e * p + 5), 6), F(-p * (e * p - 1), 2), F(p * (e * p - 1), 3)),
        (1, -1, -p, F(-p * (e * p - 1), 6), F(p * (e * p + 1), 2), F(-p * (e * p - 1), 3)),
        (1, -p - 1, 0, F(p * (e * p - 1), 6), F(-p * (e * p - 1), 2), F(p * (e * p + 2), 3)),
    ]
    scale = Fraction(1, p**4)
    entries = tuple(tuple(Fraction(x) * scale for x in row) for row in rows)
    return MoriMatrix(p, entries, STANDARD_LABELS)


def _all_coefficients(p: int) -> Iterable[Coefficients]:
    return itertools.product(range(p), repeat=4)


@lru_cache(maxsize=None)
def _orbit_members(p: int) -> Dict[SplittingType, Tuple[BinaryCubicForm, ...]]:
    members: Dict[SplittingType, List[BinaryCubicForm]] = {s: [] for s in ORBIT_ORDER}
    for coeffs in _all_coefficients(p):
        f = BinaryCubicForm(*coeffs)
        members[splitting_symbol(f, p)].append(f)
    return {s: tuple(forms) for s, forms in members.items()}


def _gl2_mod(p: int) -> List[GL2Element]:
    return [
        GL2Element(*entries, modulus=p)
        for entries in itertools.product(range(p), repeat=4)
        if (entries[0] * entries[3] - entries[1] * entries[2]) % p
    ]


@lru_cache(maxsize=None)
def dual_orbits(p: int) -> Tuple[DualOrbit, ...]:
    """V*(F_p) の軌道。p ≠ 3 では整数形式の分解型で分類する"""
    _require_prime(p)
    if p != 3:
        grouped: Dict[SplittingType, List[DualForm]] = {s: [] for s in ORBIT_ORDER}
        for coeffs in _all_coefficients(p):
            f_star = DualForm(*coeffs)
            grouped[splitting_symbol(f_star.integral_form(), p)].append(f_star)
        return tuple(
            DualOrbit(s.value, min(grouped[s], key=lambda g: g.coefficients), len(grouped[s]))
            for s in ORBIT_ORDER
        )
    # p = 3 では軌道を直接計算する
    group = _gl2_mod(p)
    seen: set = set()
    orbits: List[List[DualForm]] = []
    for coeffs in _all_coefficients(p):
        f_star = DualForm(*coeffs)
        if f_star in seen:
            continue
        orbit = {act_dual(gamma, f_star) for gamma in group}
        seen |= orbit
        orbits.append(sorted(orbit, key=lambda g: g.coefficients))
    orbits.sort(key=lambda orbit: (len(orbit), orbit[0].coefficients))
    return tuple(DualOrbit(f"O*{k + 1}", orbit[0], len(orbit)) for k, orbit in enumerate(orbits))


def dual_orbit_label(f_star: DualForm, p: int) -> str:
    """双対形式の属する軌道のラベル"""
    if p != 3:
        return splitting_symbol(f_star.mod(p).integral_form(), p).value
    target = f_star.mod(p)
    group = _gl2_mod(p)
    orbit = {act_dual(gamma, target) for gamma in group}
    for candidate in dual_orbits(p):
        if candidate.representative in orbit:
            return candidate.label
    raise InvalidInputError(f"軌道が見つかりません: {f_star}")


def _character_sum(orbit: Iterable[BinaryCubicForm], size: int, f_star: DualForm, p: int) -> Fraction:
    """Σ_{f∈O} e([f,f*]/p)。O はスカラー倍で閉じるので非零の値は等分布する"""
    zeros = sum(1 for f in orbit if dual_pairing(f, f_star, p) == 0)
    return zeros - Fraction(size - zeros, p - 1)


def brute_force_ft(p: int) -> MoriMatrix:
    """直接和による変換行列（任意の素数）"""
    _require_prime(p)
    members = _orbit_members(p)
    scale = Fraction(1, p**4)
    entries = []
    for orbit in dual_orbits(p):
        row = tuple(
            _character_sum(members[s], len(members[s]), orbit.representative, p) * scale
            for s in ORBIT_ORDER
        )
        entries.append(row)
    labels = tuple(orbit.label for orbit in dual_orbits(p))
    logger.debug(f"p={p} の変換行列を直接計算しました")
    return MoriMatrix(p, tuple(entries), labels)


def transform_matrix(p: int) -> MoriMatrix:
    return brute_force_ft(p) if p == 3 else mori_matrix(p)


def fourier_transform(phi: InvariantFunction, p: int) -> InvariantFunction:
    """φ̂(f*) = p^(-4) Σ_f φ(f) e([f,f*]/p)（双対軌道上の関数）"""
    return transform_matrix(p).apply(phi)


def transform_values(phi: InvariantFunction, p: int) -> Dict[DualForm, Fraction]:
    """全ての f* での φ̂(f*) を直接計算（O(p⁸)）"""
    members = _orbit_members(p)
    scale = Fraction(1, p**4)
    values: Dict[DualForm, Fraction] = {}
    for coeffs in _all_coefficients(p):
        f_star = DualForm(*coeffs)
        total = Fraction(0)
        for s in ORBIT_ORDER:
            if phi[s]:
                total += phi[s] * _character_sum(members[s], len(members[s]), f_star, p)
        values[f_star] = total * scale
    return values


def dual_invariance_check(phi: InvariantFunction, p: int) -> bool:
    """φ̂ が各双対軌道上で一定で、行列による値と一致するか"""
    expected = fourier_transform(phi, p)
    values = transform_values(phi, p)
    return all(value == expected[dual_orbit_label(f_star, p)] for f_star, value in values.items())


def _dual_sizes(p: int) -> Tuple[int, ...]:
    return tuple(orbit.size for orbit in dual_orbits(p))


def inverse_transform_matrix(p: int) -> Tuple[Tuple[Fraction, ...], ...]:
    """双対側から V 側への変換 m'_ji = |O*_i| m_ij / |O_j|"""
    matrix = transform_matrix(p)
    sizes = orbit_sizes(p)
    dual_sizes = _dual_sizes(p)
    return tuple(
        tuple(Fraction(dual_sizes[i]) * matrix[i, j] / sizes[s] for i in range(len(dual_sizes)))
        for j, s in enumerate(ORBIT_ORDER)
    )


def double_transform_check(p: int) -> bool:
    """変換を2回施すと p^(-4) 倍の恒等写像になるか（-I は作用に含まれる）"""
    matrix = transform_matrix(p)
    inverse = inverse_transform_matrix(p)
    expected = Fraction(1, p**4)
    for j in range(len(ORBIT_ORDER)):
        column = matrix.column(j)
        for k, row in enumerate(inverse):
            value = sum((x * y for x, y in zip(row, column)), Fraction(0))
            if value != (expected if j == k else 0):
                logger.warning(f"二重変換が一致しません: p={p}, j={j}, k={k}, 値={value}")
                return False
    return True


def verify_orthogonality(p: int) -> List[Tuple[int, int, bool]]:
    """21 個の直交関係 Σ_i |O*_i| m_ij m_ik = δ_jk |O_j| / p⁴"""
    matrix = transform_matrix(p)
    sizes = orbit_sizes(p)
    dual_sizes = _dual_sizes(p)
    results = []
    for j in range(6):
        for k in range(j, 6):
            lhs = sum((dual_sizes[i] * matrix[i, j] * matrix[i, k] for i in range(6)), Fraction(0))
            rhs = Fraction(sizes[ORBIT_ORDER[j]], p**4) if j == k else Fraction(0)
            results.append((j + 1, k + 1, lhs == rhs))
    return results


def plancherel_check(phi: InvariantFunction, psi: InvariantFunction, p: int) -> bool:
    """Σ_{f*} φ̂ψ̂ = p^(-4) Σ_f φψ"""
    phi_hat = fourier_transform(phi, p)
    psi_hat = fourier_transform(psi, p)
    dual_sizes = _dual_sizes(p)
    lhs = sum((n * x * y for n, x, y in zip(dual_sizes, phi_hat.values, psi_hat.values)), Fraction(0))
    sizes = orbit_sizes(p)
    rhs = sum((sizes[s] * phi[s] * psi[s] for s in ORBIT_ORDER), Fraction(0)) / p**4
    return lhs == rhs


@dataclass(frozen=True)
class HatBoundRow:
    """|φ| ≤ 1 のときの |φ̂| の上限（行の絶対値和）"""
    label: str
    row_sum: Fraction
    bound: Fraction

    @property
    def holds(self) -> bool:
        return self.row_sum <= self.bound


def hat_bound_check(p: int) -> List[HatBoundRow]:
    """|φ̂(f*)| ≤ 4 (f*=0), 4/p ((1³)*), 4/p² (その他)"""
    matrix = transform_matrix(p)
    rows = []
    for i, label in enumerate(matrix.row_labels):
        if i == 0:
            bound = Fraction(4)
        elif p == 3 or label == SplittingType.TOTALLY_RAMIFIED_1_3.value:
            # p = 3 の双対軌道は分解型と対応しないため 4/p で評価
            bound = Fraction(4, p)
        else:
            bound = Fraction(4, p * p)
        rows.append(HatBoundRow(label, sum((abs(x) for x in matrix.row(i)), Fraction(0)), bound))
    return rows


def lambda_function(p: int, m: int) -> InvariantFunction:
    """f ↦ λ_{p^m}(f) を不変関数として"""
    return InvariantFunction(tuple(Fraction(lambda_local(s, m)) for s in ORBIT_ORDER))


def theta_function(p: int, m: int) -> InvariantFunction:
    return InvariantFunction(tuple(Fraction(theta_local(s, m)) for s in ORBIT_ORDER))


@dataclass(frozen=True)
class MaximalDensities:
    """mod p² で極大となる形式の分解型ごとの密度"""
    p: int
    mu: InvariantFunction
    lambda_p_hat0: Fraction
    lambda_p2_hat0: Fraction
    theta_p2_hat0: Fraction

    @property
    def total(self) -> Fraction:
        return sum(self.mu.values, Fraction(0))


def maximal_densities(p: int) -> MaximalDensities:
    """極大形式の密度 μ(σ) と û(0)"""
    _require_prime(p)
    q = Fraction(1, p**4)
    mu = InvariantFunction.from_mapping({
        SplittingType.SPLIT_111: Fraction((p - 1) ** 2 * p * (p + 1), 6) * q,
        SplittingType.PARTIAL_12: Fraction((p - 1) ** 2 * p * (p + 1), 2) * q,
        SplittingType.INERT_3: Fraction((p - 1) ** 2 * p * (p + 1), 3) * q,
        SplittingType.RAMIFIED_1_21: (p - 1) ** 2 * (p + 1) * q,
        SplittingType.TOTALLY_RAMIFIED_1_3: Fraction((p * p - 1) * (p - 1), p) * q,
    })

    def at_zero(phi: InvariantFunction) -> Fraction:
        return sum((x * y for x, y in zip(phi.values, mu.values)), Fraction(0))

    return MaximalDensities(
        p=p,
        mu=mu,
        lambda_p_hat0=at_zero(lambda_function(p, 1)),
        lambda_p2_hat0=at_zero(lambda_function(p, 2)),
        theta_p2_hat0=at_zero(theta_function(p, 2)),
    )


def _nonsingular_lift(coeffs: Coefficients, p: int) -> Optional[BinaryCubicForm]:
    """mod p² の形式の Δ ≠ 0 な持ち上げ"""
    step = p * p
    for shifts in itertools.product(range(3), repeat=4):
        f = BinaryCubicForm(*(c + step * k for c, k in zip(coeffs, shifts)))
        if _disc(*f.coefficients):
            return f
    return None


def maximal_density_by_count(p: int) -> InvariantFunction:
    """V(Z/p²Z) を数え上げて極大形式の密度を求める"""
    counts = {s: 0 for s in ORBIT_ORDER}
    for coeffs in itertools.product(range(p * p), repeat=4):
        f = _nonsingular_lift(coeffs, p)
        if f is None:
            raise InvalidInputError(f"非特異な持ち上げが見つかりません: {coeffs}")
        if is_maximal_at(f, p):
            counts[splitting_symbol(f, p)] += 1
    total = p**8
    return InvariantFunction(tuple(Fraction(counts[s], total) for s in ORBIT_ORDER))
