"""ディリクレ係数モジュール（λ_n, θ_n, オイラー因子, e_{p,m}）"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import prod
from typing import Dict, Iterator, List, Tuple

import numpy as np
from sympy import Poly, div, factorint, primerange, symbols

from modules.forms import BinaryCubicForm, discriminant
from modules.local import SplittingType, maximalize, splitting_symbol
from utils.config import E_SERIES_TERMS
from utils.errors import InvalidInputError

logger = logging.getLogger(__name__)

_x = symbols('x')

# D_p(s)^(-1) の係数（x = p^(-s) の低次から）
D_INVERSE = {
    SplittingType.SPLIT_111: (1, -2, 1),
    SplittingType.PARTIAL_12: (1, 0, -1),
    SplittingType.INERT_3: (1, 1, 1),
    SplittingType.RAMIFIED_1_21: (1, -1, 0),
    SplittingType.TOTALLY_RAMIFIED_1_3: (1, 0, 0),
    SplittingType.ZERO_0: (1, 0, 0),
}

# E_p(s,f) として現れうる多項式
ALLOWED_E_POLYNOMIALS = {
    (1,): '1',
    (1, -1): '1-x',
    (1, 1): '1+x',
    (1, -2, 1): '(1-x)^2',
    (1, 0, -1): '1-x^2',
    (1, 1, 1): '1+x+x^2',
}


@lru_cache(maxsize=None)
def _local_series(symbol: SplittingType, terms: int) -> Tuple[int, ...]:
    """1/D_p^(-1) の級数係数"""
    _, c1, c2 = D_INVERSE[symbol]
    series = [1]
    for m in range(1, terms + 1):
        value = -c1 * series[m - 1] - (c2 * series[m - 2] if m >= 2 else 0)
        series.append(value)
    return tuple(series)


@lru_cache(maxsize=None)
def _power_sums(symbol: SplittingType, terms: int) -> Tuple[int, ...]:
    """局所根のべき和（ニュートンの恒等式）"""
    _, c1, c2 = D_INVERSE[symbol]
    e1, e2 = -c1, c2
    sums = [2 if symbol in (SplittingType.SPLIT_111, SplittingType.PARTIAL_12, SplittingType.INERT_3)
            else (1 if symbol == SplittingType.RAMIFIED_1_21 else 0)]
    for m in range(1, terms + 1):
        if m == 1:
            value = e1
        elif m == 2:
            value = e1 * sums[1] - 2 * e2
        else:
            value = e1 * sums[m - 1] - e2 * sums[m - 2]
        sums.append(value)
    return tuple(sums)


def lambda_local(symbol: SplittingType, m: int) -> int:
    """λ_{p^m}（分解型のみで決まる）"""
    return _local_series(symbol, max(m, 2))[m]


def theta_local(symbol: SplittingType, m: int) -> int:
    """θ_{p^m}（m ≥ 1）"""
    if m < 1:
        raise InvalidInputError(f"m は1以上である必要があります: {m}")
    return _power_sums(symbol, max(m, 2))[m]


def lambda_n(f: BinaryCubicForm, n: int) -> int:
    """λ_n(f)（n について乗法的）"""
    if n < 1:
        raise InvalidInputError(f"n は正である必要があります: {n}")
    return prod(lambda_local(splitting_symbol(f, p), e) for p, e in factorint(n).items())


def theta(f: BinaryCubicForm, p: int, m: int) -> int:
    """θ_{p^m}(f)"""
    return theta_local(splitting_symbol(f, p), m)


def _smallest_prime_factors(N: int) -> np.ndarray:
    spf = np.zeros(N + 1, dtype=np.int64)
    for p in primerange(2, N + 1):
        block = spf[p::p]
        block[block == 0] = p
    return spf


def lambda_table(f: BinaryCubicForm, N: int) -> np.ndarray:
    """λ_1..λ_N を篩で一括計算（添字0は0）"""
    values = np.zeros(N + 1, dtype=np.int64)
    if N < 1:
        return values
    values[1] = 1
    spf = _smallest_prime_factors(N)
    local: Dict[int, Tuple[int, ...]] = {}
    for n in range(2, N + 1):
        p = int(spf[n])
        if p not in local:
            terms = 1
            while p ** (terms + 1) <= N:
                terms += 1
            local[p] = _local_series(splitting_symbol(f, p), max(terms, 2))
        m, e = n, 0
        while m % p == 0:
            m //= p
            e += 1
        values[n] = values[m] * local[p][e]
    return values


@dataclass(frozen=True)
class EulerFactorData:
    """局所オイラー因子（x = p^(-s) の多項式、inverse なら逆数）"""
    p: int
    kind: str
    coefficients: Tuple[int, ...]
    inverse: bool

    def polynomial(self, x: complex) -> complex:
        return sum(c * x**k for k, c in enumerate(self.coefficients))

    def evaluate(self, s: complex) -> complex:
        value = self.polynomial(self.p ** (-s))
        return 1 / value if self.inverse else value

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1


def _trim(coefficients: Tuple[int, ...]) -> Tuple[int, ...]:
    coefficients = tuple(coefficients)
    while len(coefficients) > 1 and coefficients[-1] == 0:
        coefficients = coefficients[:-1]
    return coefficients


def _e_polynomial(d_inverse: Tuple[int, ...], l_inverse: Tuple[int, ...]) -> Tuple[int, ...]:
    """E_p = L_p^(-1) / D_p^(-1) を厳密に割る"""
    numerator = Poly(list(reversed(_trim(l_inverse))), _x)
    denominator = Poly(list(reversed(_trim(d_inverse))), _x)
    quotient, remainder = div(numerator, denominator)
    if not remainder.is_zero:
        raise InvalidInputError(f"E_p が多項式になりません: {l_inverse} / {d_inverse}")
    return _trim(tuple(int(c) for c in reversed(quotient.all_coeffs())))


def euler_factor(f: BinaryCubicForm, p: int, kind: str) -> EulerFactorData:
    """D / L / E の局所因子"""
    kind = kind.upper()
    if kind == 'D':
        return EulerFactorData(p, 'D', _trim(D_INVERSE[splitting_symbol(f, p)]), True)
    maximal = maximalize(f).maximal_form
    l_inverse = _trim(D_INVERSE[splitting_symbol(maximal, p)])
    if kind == 'L':
        return EulerFactorData(p, 'L', l_inverse, True)
    if kind == 'E':
        d_inverse = _trim(D_INVERSE[splitting_symbol(f, p)])
        return EulerFactorData(p, 'E', _e_polynomial(d_inverse, l_inverse), False)
    raise InvalidInputError(f"未知の因子の種類: {kind}")


def euler_factor_identity(f: BinaryCubicForm, p: int) -> bool:
    """D_p = L_p · E_p を多項式の等式として確認"""
    d_inverse = Poly(list(reversed(euler_factor(f, p, 'D').coefficients)), _x)
    l_inverse = Poly(list(reversed(euler_factor(f, p, 'L').coefficients)), _x)
    e_poly = Poly(list(reversed(euler_factor(f, p, 'E').coefficients)), _x)
    return (d_inverse * e_poly - l_inverse).is_zero


@dataclass(frozen=True)
class UnbalancedCoeffs:
    """e_{p,0..M}"""
    p: int
    values: Tuple[Fraction, ...]


def e_series(polynomial: Tuple[int, ...], p: int, M: int) -> Tuple[Fraction, ...]:
    """u²P(1/u)/P(u/p) の u^0..u^M の係数"""
    e0, e1, e2 = (tuple(polynomial) + (0, 0, 0))[:3]
    numerator = [Fraction(e2), Fraction(e1), Fraction(e0)]
    denominator = [Fraction(e0), Fraction(e1, p), Fraction(e2, p * p)]
    coefficients: List[Fraction] = []
    for m in range(M + 1):
        value = numerator[m] if m < 3 else Fraction(0)
        for k in (1, 2):
            if m - k >= 0:
                value -= denominator[k] * coefficients[m - k]
        coefficients.append(value / denominator[0])
    return tuple(coefficients)


def e_coeffs(f: BinaryCubicForm, p: int, M: int = E_SERIES_TERMS) -> UnbalancedCoeffs:
    """e_{p,m}(f)。p ∤ ind(f) なら全て0"""
    result = maximalize(f)
    if result.index % p:
        return UnbalancedCoeffs(p, tuple(Fraction(0) for _ in range(M + 1)))
    polynomial = euler_factor(f, p, 'E').coefficients
    return UnbalancedCoeffs(p, e_series(polynomial, p, M))


@dataclass
class UnbalancedExpansion:
    """非平衡AFEの係数 e_k(f) を素数ごとのデータから組み立てる"""
    form: BinaryCubicForm
    index: int
    radical: int
    field_discriminant: int
    maximal_form: BinaryCubicForm
    local: Dict[int, Tuple[Fraction, ...]] = field(default_factory=dict)
    polynomials: Dict[int, Tuple[int, ...]] = field(default_factory=dict)

    @classmethod
    def build(cls, f: BinaryCubicForm, M: int = E_SERIES_TERMS) -> 'UnbalancedExpansion':
        result = maximalize(f)
        primes = sorted(factorint(result.index))
        expansion = cls(
            form=f,
            index=result.index,
            radical=prod(primes),
            field_discriminant=result.field_discriminant,
            maximal_form=result.maximal_form,
        )
        for p in primes:
            polynomial = euler_factor(f, p, 'E').coefficients
            expansion.polynomials[p] = polynomial
            expansion.local[p] = e_series(polynomial, p, M)
        return expansion

    @property
    def support_modulus(self) -> int:
        """e_k ≠ 0 となる k が必ず割り切られる数 q₁"""
        return prod(p for p, values in self.local.items() if values[0] == 0)

    def coefficient(self, k: int) -> Fraction:
        """e_k(f)"""
        factors = factorint(k)
        if any(p not in self.local for p in factors):
            return Fraction(0)
        value = Fraction(1)
        for p, values in self.local.items():
            exponent = factors.get(p, 0)
            if exponent >= len(values):
                raise InvalidInputError(f"打ち切り M を超える指数: p={p}, m={exponent}")
            value *= values[exponent]
            if not value:
                break
        return value

    def support(self, K: int) -> Iterator[Tuple[int, Fraction]]:
        """k ≤ K で e_k ≠ 0 となる (k, e_k)"""
        ks = [1]
        for p, values in self.local.items():
            extended = []
            for k in ks:
                power = 1
                for m in range(len(values)):
                    if k * power > K:
                        break
                    if values[m]:
                        extended.append(k * power)
                    power *= p
            ks = extended
        for k in sorted(ks):
            value = self.coefficient(k)
            if value:
                yield k, value

    def e_ratio(self, s: complex) -> complex:
        """E(1/2 - s) / E(1/2 + s) を直接評価"""
        value = complex(1)
        for p, polynomial in self.polynomials.items():
            factor = EulerFactorData(p, 'E', polynomial, False)
            value *= factor.evaluate(0.5 - s) / factor.evaluate(0.5 + s)
        return value

    def e_ratio_series(self, s: complex) -> Tuple[complex, float]:
        """rad^(2s-1) Σ e_k k^(1/2-s) を素数ごとの級数の積で評価し、末尾の見積もりも返す"""
        value = complex(self.radical) ** (2 * s - 1)
        tail = 0.0
        for p, values in self.local.items():
            u = p ** (0.5 - s)
            terms = [complex(float(c)) * u**m for m, c in enumerate(values)]
            value *= sum(terms)
            last, previous = abs(terms[-1]), abs(terms[-2])
            if last and previous:
                ratio = last / previous
                tail += last * ratio / (1 - ratio) if ratio < 1 else float('inf')
        return value, tail


def e_series_check(f: BinaryCubicForm, s: complex, M: int = E_SERIES_TERMS) -> Dict[str, float]:
    """級数表示と直接評価の差"""
    expansion = UnbalancedExpansion.build(f, M)
    direct = expansion.e_ratio(s)
    series, tail = expansion.e_ratio_series(s)
    return {'direct': abs(direct), 'difference': abs(direct - series), 'tail_bound': tail}


def field_discriminant_sign_ok(f: BinaryCubicForm) -> bool:
    """Δ(f) と Δ(K_f) の符号が一致するか"""
    result = maximalize(f)
    return discriminant(f) * result.field_discriminant > 0
