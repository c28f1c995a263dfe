"""軌道の数え上げと留数予測モジュール"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import mpmath
import sympy
from sympy import factorint, primerange

from modules.analytic import SmoothWeight
from modules.artin import D_INVERSE, lambda_local
from modules.forms import BinaryCubicForm, OrbitRecord
from modules.fourier import lambda_function, maximal_densities, orbit_sizes
from modules.local import (
    ORBIT_ORDER,
    LocalWeight,
    SplittingType,
    enumerate_suborders,
    is_maximal_at,
    maximalize,
    mobius,
    splitting_symbol,
)
from utils.config import LocalSpec
from utils.errors import InvalidInputError, PrecisionError

logger = logging.getLogger(__name__)

# 留数は SL₂ で正規化されたシンタニ・ゼータ関数のもの。GL₂(Z) 軌道の和ではその半分になる
ORBIT_SCALE = 0.5

EULER_SERIES_TERMS = 24
EULER_PRIME_CUTOFF = 2000


@dataclass(frozen=True)
class ResidueConstants:
    """シンタニ・ゼータ関数の留数 α, β (s=1), γ (s=5/6)"""
    sign: int
    alpha: float
    beta: float
    gamma: float

    def check(self) -> bool:
        return self.alpha > 0 and self.beta > 0 and self.gamma < 0

    @property
    def orbit_alpha(self) -> float:
        return self.alpha * ORBIT_SCALE

    @property
    def orbit_beta(self) -> float:
        return self.beta * ORBIT_SCALE

    @property
    def orbit_gamma(self) -> float:
        return self.gamma * ORBIT_SCALE


@lru_cache(maxsize=None)
def residue_constants(sign: int) -> ResidueConstants:
    """α±, β±, γ± を高精度で計算"""
    if sign not in (1, -1):
        raise InvalidInputError(f"符号は ±1 である必要があります: {sign}")
    with mpmath.workdps(30):
        pi2 = mpmath.pi**2
        secondary = mpmath.zeta(mpmath.mpf(1) / 3) * 2 * pi2 / (9 * mpmath.gamma(mpmath.mpf(2) / 3) ** 3)
        if sign > 0:
            constants = ResidueConstants(1, float(pi2 / 36), float(pi2 / 12), float(secondary))
        else:
            constants = ResidueConstants(-1, float(pi2 / 12), float(pi2 / 12), float(secondary * mpmath.sqrt(3)))
    if not constants.check():
        raise PrecisionError("留数の符号が想定と異なります", {'constants': constants})
    return constants


def _as_sympy(p) -> sympy.Expr:
    return sympy.Integer(p) if isinstance(p, int) else p


def b_value(symbol: SplittingType, p: int) -> Fraction:
    """b_p(f)"""
    table = {
        SplittingType.SPLIT_111: Fraction(3),
        SplittingType.PARTIAL_12: Fraction(1),
        SplittingType.INERT_3: Fraction(0),
        SplittingType.RAMIFIED_1_21: Fraction(p + 2, p + 1),
        SplittingType.TOTALLY_RAMIFIED_1_3: Fraction(1, p + 1),
        SplittingType.ZERO_0: Fraction(1),
    }
    return table[symbol]


def c_value(symbol: SplittingType, p) -> sympy.Expr:
    """c_p(f)（p^(1/3) を含む厳密な式。p は整数でも記号でもよい）"""
    p = _as_sympy(p)
    x = p ** sympy.Rational(-1, 3)
    normalized = {
        SplittingType.SPLIT_111: (1 - x**2) * (1 + x) ** 2,
        SplittingType.PARTIAL_12: 1 - x**4,
        SplittingType.INERT_3: (1 - x) * (1 + 1 / p),
        SplittingType.RAMIFIED_1_21: (1 + x) * (1 - 1 / p),
        SplittingType.TOTALLY_RAMIFIED_1_3: 1 - x**4,
        SplittingType.ZERO_0: (1 - p**-2) * p ** sympy.Rational(2, 3),
    }
    return normalized[symbol] / (1 - p**-2)


def maximal_density_expr(symbol: SplittingType, p) -> sympy.Expr:
    """極大形式の密度 μ(σ) を p の式として"""
    p = _as_sympy(p)
    base = (p - 1) ** 2 * (p + 1) / p**3
    table = {
        SplittingType.SPLIT_111: base / 6,
        SplittingType.PARTIAL_12: base / 2,
        SplittingType.INERT_3: base / 3,
        SplittingType.RAMIFIED_1_21: base / p,
        SplittingType.TOTALLY_RAMIFIED_1_3: (p**2 - 1) * (p - 1) / p**5,
        SplittingType.ZERO_0: sympy.Integer(0),
    }
    return table[symbol]


@dataclass(frozen=True)
class DensityTable:
    """分解型ごとの b_p, c_p"""
    p: int
    b: Dict[SplittingType, Fraction]
    c: Dict[SplittingType, sympy.Expr]

    @classmethod
    @lru_cache(maxsize=None)
    def for_prime(cls, p: int) -> "DensityTable":
        return cls(p, {s: b_value(s, p) for s in ORBIT_ORDER}, {s: c_value(s, p) for s in ORBIT_ORDER})

    def c_float(self, symbol: SplittingType) -> float:
        return float(self.c[symbol])


def _orbit_fractions(p: int) -> Dict[SplittingType, Fraction]:
    sizes = orbit_sizes(p)
    return {s: Fraction(n, p**4) for s, n in sizes.items()}


@dataclass
class EulerProductResult:
    """ζ(k/d) による加速付きオイラー積"""
    value: float
    tail_bound: float
    exponents: Dict[int, Fraction] = field(default_factory=dict)
    prime_cutoff: int = EULER_PRIME_CUTOFF


def _series_log(coefficients: Sequence[Fraction]) -> List[Fraction]:
    """log F の係数（F の定数項は1）"""
    logs = [Fraction(0)] * len(coefficients)
    for n in range(1, len(coefficients)):
        value = n * coefficients[n] - sum((j * logs[j] * coefficients[n - j] for j in range(1, n)), Fraction(0))
        logs[n] = value / n
    return logs


def zeta_exponents(coefficients: Sequence[Fraction]) -> Dict[int, Fraction]:
    """F(y) ≈ Π_k (1 - y^k)^(e_k) となる e_k"""
    if coefficients[0] != 1:
        raise InvalidInputError("定数項は1である必要があります")
    logs = _series_log([Fraction(c) for c in coefficients])
    exponents: Dict[int, Fraction] = {}
    for k in range(1, len(coefficients)):
        # k·e_k = -Σ_{m|k} μ(k/m)·m·L_m
        value = -sum((mobius(k // m) * m * logs[m] for m in sympy.divisors(k)), Fraction(0))
        if value:
            exponents[k] = value / k
    return exponents


def series_coefficients(expression: sympy.Expr, variable: sympy.Symbol, terms: int) -> List[Fraction]:
    """有理関数を variable についてべき級数展開"""
    expansion = sympy.series(expression, variable, 0, terms + 1).removeO()
    poly = sympy.Poly(sympy.expand(expansion), variable)
    coefficients = [Fraction(0)] * (terms + 1)
    for (power,), coef in poly.terms():
        if power <= terms:
            coefficients[power] = Fraction(str(sympy.nsimplify(coef)))
    return coefficients


def accelerated_euler_product(coefficients: Sequence[Fraction], d: int, local_value: Callable[[int], float],
                              prime_cutoff: int = EULER_PRIME_CUTOFF) -> EulerProductResult:
    """Π_p F_p を Π_k ζ(k/d)^(-e_k) と p ≤ P の補正で評価（F_p = F(p^(-1/d)) の級数が coefficients）"""
    exponents = zeta_exponents(coefficients)
    divergent = [k for k, e in exponents.items() if k <= d and e]
    if divergent:
        raise PrecisionError("オイラー積が収束しません", {'exponents': {k: str(exponents[k]) for k in divergent}})
    value = mpmath.mpf(1)
    for k, e in exponents.items():
        value *= mpmath.zeta(mpmath.mpf(k) / d) ** (-float(e))
    for p in primerange(2, prime_cutoff + 1):
        correction = mpmath.mpf(local_value(p))
        for k, e in exponents.items():
            correction /= (1 - mpmath.mpf(p) ** (-mpmath.mpf(k) / d)) ** float(e)
        value *= correction
    order = mpmath.mpf(len(coefficients)) / d
    tail = float(mpmath.mpf(prime_cutoff) ** (1 - order) / (order - 1)) if order > 1 else float('inf')
    return EulerProductResult(float(value), tail, exponents, prime_cutoff)


class SieveFunctional:
    """留数汎関数 𝒜, ℬ, 𝒞 とその極大版・非極大版"""

    @staticmethod
    def A_p(values: Dict[SplittingType, Fraction], p: int) -> Fraction:
        """𝒜_p(φ) = φ̂(0)"""
        fractions = _orbit_fractions(p)
        return sum((fractions[s] * values[s] for s in ORBIT_ORDER), Fraction(0))

    @staticmethod
    def B_p(values: Dict[SplittingType, Fraction], p: int) -> Fraction:
        fractions = _orbit_fractions(p)
        table = DensityTable.for_prime(p)
        return sum((fractions[s] * table.b[s] * values[s] for s in ORBIT_ORDER), Fraction(0))

    @staticmethod
    def C_p_exact(values: Dict[SplittingType, Fraction], p: int) -> sympy.Expr:
        fractions = _orbit_fractions(p)
        table = DensityTable.for_prime(p)
        total = sum(
            sympy.Rational(fractions[s].numerator, fractions[s].denominator)
            * sympy.Rational(values[s].numerator, values[s].denominator)
            * table.c[s]
            for s in ORBIT_ORDER
        )
        return sympy.expand(total)

    @staticmethod
    def C_p(values: Dict[SplittingType, Fraction], p: int) -> float:
        return float(SieveFunctional.C_p_exact(values, p))

    @staticmethod
    def A_max_p(values: Dict[SplittingType, Fraction], p: int) -> Fraction:
        """極大形式上の積分"""
        mu = maximal_densities(p).mu
        return sum((mu[s] * values[s] for s in ORBIT_ORDER), Fraction(0))

    @staticmethod
    def C_max_p(values: Dict[SplittingType, Fraction], p: int) -> float:
        mu = maximal_densities(p).mu
        table = DensityTable.for_prime(p)
        return float(sum(float(mu[s]) * float(values[s]) * table.c_float(s) for s in ORBIT_ORDER))

    @staticmethod
    def A(weight: LocalWeight) -> Fraction:
        return math.prod((SieveFunctional.A_p(weight.at(p), p) for p in weight.primes), start=Fraction(1))

    @staticmethod
    def B(weight: LocalWeight) -> Fraction:
        return math.prod((SieveFunctional.B_p(weight.at(p), p) for p in weight.primes), start=Fraction(1))

    @staticmethod
    def C(weight: LocalWeight) -> float:
        return math.prod(SieveFunctional.C_p(weight.at(p), p) for p in weight.primes)

    @staticmethod
    def A_q(weight: LocalWeight, q: int) -> Fraction:
        """𝒜^(q)：q の素因子で非極大な部分の積分"""
        value = Fraction(1)
        for p in sorted(set(weight.primes) | set(factorint(q))):
            values = weight.at(p)
            full = SieveFunctional.A_p(values, p)
            value *= full - SieveFunctional.A_max_p(values, p) if q % p == 0 else full
        return value

    @staticmethod
    def C_q(weight: LocalWeight, q: int) -> float:
        value = 1.0
        for p in sorted(set(weight.primes) | set(factorint(q))):
            values = weight.at(p)
            full = SieveFunctional.C_p(values, p)
            value *= full - SieveFunctional.C_max_p(values, p) if q % p == 0 else full
        return value

    @staticmethod
    def A_max(weight: LocalWeight) -> float:
        """𝒜^max(φ) = Π_{p∈S} 𝒜^max_p(φ_p)/((1-p⁻²)(1-p⁻³)) / (ζ(2)ζ(3))"""
        value = 1 / (mpmath.zeta(2) * mpmath.zeta(3))
        for p in weight.primes:
            value *= float(SieveFunctional.A_max_p(weight.at(p), p)) / ((1 - p**-2) * (1 - p**-3))
        return float(value)

    @staticmethod
    def C_max(weight: LocalWeight) -> float:
        value = unspecified_c_max_product().value
        ones = {s: Fraction(1) for s in ORBIT_ORDER}
        for p in weight.primes:
            value *= SieveFunctional.C_max_p(weight.at(p), p) / SieveFunctional.C_max_p(ones, p)
        return value

    @staticmethod
    def inclusion_exclusion_check(weight: LocalWeight, primes: Sequence[int]) -> Dict[str, Any]:
        """Σ_q μ(q)𝒜^(q) = 𝒜^max を有限個の素数上で確認"""
        primes = sorted(set(primes) | set(weight.primes))
        lhs_a = Fraction(0)
        lhs_c = 0.0
        for r in range(len(primes) + 1):
            for subset in itertools.combinations(primes, r):
                q = math.prod(subset)
                sign = (-1) ** r
                term_a = Fraction(1)
                term_c = 1.0
                for p in primes:
                    values = weight.at(p)
                    full_a = SieveFunctional.A_p(values, p)
                    full_c = SieveFunctional.C_p(values, p)
                    if p in subset:
                        term_a *= full_a - SieveFunctional.A_max_p(values, p)
                        term_c *= full_c - SieveFunctional.C_max_p(values, p)
                    else:
                        term_a *= full_a
                        term_c *= full_c
                lhs_a += sign * term_a
                lhs_c += sign * term_c
        rhs_a = math.prod((SieveFunctional.A_max_p(weight.at(p), p) for p in primes), start=Fraction(1))
        rhs_c = math.prod(SieveFunctional.C_max_p(weight.at(p), p) for p in primes)
        return {'A_exact': lhs_a == rhs_a, 'C_difference': abs(lhs_c - rhs_c)}


@lru_cache(maxsize=None)
def unspecified_c_max_product() -> EulerProductResult:
    """Π_p Σ_σ μ(σ)c_p(σ)（全ての素数で制約なし）"""
    x = sympy.Symbol('x', positive=True)
    p = x**-3
    local = sum(maximal_density_expr(s, p) * c_value(s, p) for s in ORBIT_ORDER)
    coefficients = series_coefficients(sympy.cancel(local), x, EULER_SERIES_TERMS)
    ones = {s: Fraction(1) for s in ORBIT_ORDER}
    return accelerated_euler_product(coefficients, 3, lambda q: SieveFunctional.C_max_p(ones, q))


def closed_form_c_lambda(p: int) -> float:
    """𝒞_p(λ_p) の閉じた式"""
    x = p ** (-1 / 3)
    return (1 / 3) * (1 - 1 / p) * (1 - x) * ((1 + x) ** 3 - (1 + 1 / p)) + (1 / p) * (1 - 1 / p) * (1 + x)


def _records_in_window(records: Iterable[OrbitRecord], weight_fn: SmoothWeight, X: float,
                       sign: int) -> Iterable[Tuple[OrbitRecord, float]]:
    lo, hi = weight_fn.support
    for record in records:
        disc = record.discriminant
        if (disc > 0) != (sign > 0):
            continue
        ratio = abs(disc) / X
        if lo <= ratio <= hi:
            psi = float(weight_fn(ratio))
            if psi:
                yield record, psi


def smoothed_count(weight: LocalWeight, psi: SmoothWeight, X: float, sign: int,
                   records: Iterable[OrbitRecord]) -> float:
    """N_Ψ(φ; X) = Σ φ(f) Ψ(|Δ|/X) / |Stab(f)|"""
    terms = [
        float(weight(record.form)) * value / record.stabilizer_order
        for record, value in _records_in_window(records, psi, X, sign)
    ]
    return math.fsum(terms)


def predicted_count(weight: LocalWeight, psi: SmoothWeight, X: float, sign: int) -> Tuple[float, float]:
    """(主項, 二次項) = ((α𝒜+βℬ)Ψ̃(1)X, γ𝒞Ψ̃(5/6)X^(5/6))"""
    constants = residue_constants(sign)
    A = float(SieveFunctional.A(weight))
    B = float(SieveFunctional.B(weight))
    C = SieveFunctional.C(weight)
    main = (constants.orbit_alpha * A + constants.orbit_beta * B) * psi.mellin(1).real * X
    secondary = constants.orbit_gamma * C * psi.mellin(5 / 6).real * X ** (5 / 6)
    return main, secondary


@dataclass
class PolyaReport:
    """立方版ポリア・ヴィノグラドフの検証"""
    p: int
    k: int
    sign: int
    X: float
    lhs: float
    main: float
    secondary: float

    @property
    def remainder(self) -> float:
        return self.lhs - self.main - self.secondary

    @property
    def ratio(self) -> float:
        scale = self.p if self.k == 1 else self.k * self.p**2
        return abs(self.remainder) / scale


def polya_vinogradov_check(p: int, psi: SmoothWeight, X: float, sign: int,
                           records: Sequence[OrbitRecord], k: int = 1) -> PolyaReport:
    """Σ λ_{p^k}(f) Ψ(|Δ|/X)/|Stab| と予測の差"""
    weight = lambda_function(p, k).to_local_weight(p)
    lhs = smoothed_count(weight, psi, X, sign, records)
    main, secondary = predicted_count(weight, psi, X, sign)
    return PolyaReport(p, k, sign, X, lhs, main, secondary)


def nonmaximal_primes(record: OrbitRecord) -> List[int]:
    """f が非極大となる素数"""
    disc = abs(record.discriminant)
    return [p for p, e in sorted(factorint(disc).items()) if e >= 2 and not is_maximal_at(record.form, p)]


@dataclass
class SieveReport:
    """包除原理による極大形式への篩"""
    X: float
    sign: int
    sieved: Fraction
    direct: Fraction
    per_q: Dict[int, Fraction]
    truncated: bool

    @property
    def exact(self) -> bool:
        return self.sieved == self.direct


def sieve_to_maximal(weight: LocalWeight, psi: SmoothWeight, X: float, sign: int,
                     records: Sequence[OrbitRecord], q_cut: Optional[int] = None) -> SieveReport:
    """Σ_q μ(q) Σ_{f∈W_q} φ(f)Ψ/|Stab| と極大形式上の直接和"""
    if q_cut is not None and q_cut < 1:
        raise InvalidInputError(f"Q_cut は1以上である必要があります: {q_cut}")
    per_q: Dict[int, Fraction] = {}
    direct = Fraction(0)
    truncated = False
    for record, value in _records_in_window(records, psi, X, sign):
        term = weight(record.form) * Fraction(value) / record.stabilizer_order
        if not term:
            continue
        bad = nonmaximal_primes(record)
        if not bad:
            direct += term
        for r in range(len(bad) + 1):
            for subset in itertools.combinations(bad, r):
                q = math.prod(subset)
                if q_cut is not None and q > q_cut:
                    truncated = True
                    continue
                per_q[q] = per_q.get(q, Fraction(0)) + term
    sieved = sum((mobius(q) * total for q, total in per_q.items()), Fraction(0))
    return SieveReport(X, sign, sieved, direct, dict(sorted(per_q.items())), truncated)


def davenport_report(records: Sequence[OrbitRecord], X: float, sign: int) -> Dict[int, Dict[str, float]]:
    """|W_q ∩ {|Δ| < X}| ≤ C X/q² の C を q ごとに"""
    counts: Dict[int, int] = {}
    for record in records:
        disc = record.discriminant
        if (disc > 0) != (sign > 0) or abs(disc) >= X or not record.irreducible:
            continue
        bad = nonmaximal_primes(record)
        for r in range(1, len(bad) + 1):
            for subset in itertools.combinations(bad, r):
                q = math.prod(subset)
                counts[q] = counts.get(q, 0) + 1
    return {q: {'count': n, 'C': n * q * q / X} for q, n in sorted(counts.items())}


def _powerful_split(b: int) -> Tuple[int, int]:
    """b = m₁q₁（m₁ は強力数, q₁ は平方因子なし, 互いに素）"""
    m1, q1 = 1, 1
    for p, e in factorint(b).items():
        if e >= 2:
            m1 *= p**e
        else:
            q1 *= p
    return m1, q1


def index_shape_report(records: Sequence[OrbitRecord], X: float, sign: int) -> Dict[int, Dict[str, float]]:
    """指数 b の形式の個数と C = count·m₁^(5/3)q₁²/X"""
    counts: Dict[int, int] = {}
    for record in records:
        disc = record.discriminant
        if (disc > 0) != (sign > 0) or abs(disc) >= X or not record.irreducible:
            continue
        index = maximalize(record.form).index
        if index > 1:
            counts[index] = counts.get(index, 0) + 1
    report = {}
    for b, n in sorted(counts.items()):
        m1, q1 = _powerful_split(b)
        report[b] = {'count': n, 'm1': m1, 'q1': q1, 'C': n * m1 ** (5 / 3) * q1 * q1 / X}
    return report


def local_spec_weight(spec: LocalSpec) -> LocalWeight:
    """χ_Σ を局所重みとして"""
    mapping = {
        p: {s: Fraction(1 if s.value in spec.allowed_at(p) else 0) for s in ORBIT_ORDER}
        for p in spec.primes
    }
    return LocalWeight.from_mapping(mapping)


def field_count(spec: LocalSpec, psi: SmoothWeight, X: float, records: Sequence[OrbitRecord]) -> float:
    """Σ_{K∈F_Σ} Ψ(|Δ_K|/X)（既約な極大形式の 1/|Stab| 重み付き和）"""
    weight = local_spec_weight(spec)
    terms = []
    for record, value in _records_in_window(records, psi, X, spec.sign):
        if record.irreducible and not nonmaximal_primes(record):
            terms.append(float(weight(record.form)) * value / record.stabilizer_order)
    return math.fsum(terms)


def field_count_prediction(spec: LocalSpec, psi: SmoothWeight, X: float, n: int = 1) -> Tuple[float, float]:
    """(α𝒜^max(λ_n χ_Σ)X, γ𝒞^max(λ_n χ_Σ)Ψ̃(5/6)X^(5/6))"""
    constants = residue_constants(spec.sign)
    weight = local_spec_weight(spec)
    if n > 1:
        mapping = {p: weight.at(p) for p in set(weight.primes) | set(factorint(n))}
        for p, e in factorint(n).items():
            mapping[p] = {s: mapping[p][s] * lambda_local(s, e) for s in ORBIT_ORDER}
        weight = LocalWeight.from_mapping(mapping)
    main = constants.orbit_alpha * SieveFunctional.A_max(weight) * psi.mellin(1).real * X
    secondary = constants.orbit_gamma * SieveFunctional.C_max(weight) * psi.mellin(5 / 6).real * X ** (5 / 6)
    return main, secondary


def _suborder_local_series(symbol: SplittingType, p: int, terms: int) -> List[int]:
    """L_p(u²)^(-1) / ((1-u) L_p(u)^(-1) (1 - p u³)) の係数（u = p^(-s)）"""
    l_inverse = D_INVERSE[symbol]
    numerator = [0] * (2 * len(l_inverse))
    for k, c in enumerate(l_inverse):
        numerator[2 * k] = c
    denominator = [1]
    for factor in ((1, -1), l_inverse, (1, 0, 0, -p)):
        product = [0] * (len(denominator) + len(factor) - 1)
        for i, a in enumerate(denominator):
            for j, b in enumerate(factor):
                product[i + j] += a * b
        denominator = product
    series: List[int] = []
    for m in range(terms + 1):
        value = numerator[m] if m < len(numerator) else 0
        for k in range(1, min(m, len(denominator) - 1) + 1):
            value -= denominator[k] * series[m - k]
        series.append(value)
    return series


def suborder_zeta_coeffs(f: BinaryCubicForm, M: int) -> List[int]:
    """ζ_K(s)ζ(2s)ζ(3s-1)/ζ_K(2s) の係数 a_1..a_M（K は極大形式 f の体）"""
    if M < 1:
        return []
    local: Dict[int, List[int]] = {}
    coefficients = [0] * (M + 1)
    for m in range(1, M + 1):
        value = 1
        for p, e in factorint(m).items():
            if p not in local:
                terms = int(math.log(M, p)) + 1
                local[p] = _suborder_local_series(splitting_symbol(f, p), p, terms)
            value *= local[p][e]
        coefficients[m] = value
    return coefficients[1:]


def suborder_count(f: BinaryCubicForm, Z: int) -> int:
    """指数 Z 以下の部分整環の個数 N_K(Z)"""
    return sum(suborder_zeta_coeffs(f, Z))


def suborder_check(f: BinaryCubicForm, Z: int) -> Dict[str, int]:
    """ゼータ関数の係数と格子の列挙を比較"""
    if maximalize(f).index != 1:
        raise InvalidInputError(f"極大形式を指定してください: {f}")
    predicted = suborder_count(f, Z)
    enumerated = len(enumerate_suborders(f, Z))
    return {'zeta': predicted, 'lattice': enumerated}
