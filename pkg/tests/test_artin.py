"""アルティン L 関数の係数と局所因子のテスト"""
from fractions import Fraction

import pytest
from sympy import factorint

from modules.artin import (
    ALLOWED_E_POLYNOMIALS,
    UnbalancedExpansion,
    e_coeffs,
    e_series_check,
    euler_factor,
    euler_factor_identity,
    field_discriminant_sign_ok,
    lambda_local,
    lambda_n,
    lambda_table,
    theta,
    theta_local,
)
from modules.local import SplittingType, index_p_subrings, is_maximal_at
from utils.errors import InvalidInputError


@pytest.mark.parametrize('symbol, values', [
    (SplittingType.SPLIT_111, (1, 2, 3, 4)),
    (SplittingType.PARTIAL_12, (1, 0, 1, 0)),
    (SplittingType.INERT_3, (1, -1, 0, 1)),
    (SplittingType.RAMIFIED_1_21, (1, 1, 1, 1)),
    (SplittingType.TOTALLY_RAMIFIED_1_3, (1, 0, 0, 0)),
])
def test_lambda_local(symbol, values):
    assert tuple(lambda_local(symbol, m) for m in range(4)) == values


@pytest.mark.parametrize('symbol, values', [
    (SplittingType.SPLIT_111, (2, 2, 2)),
    (SplittingType.PARTIAL_12, (0, 2, 0)),
    (SplittingType.INERT_3, (-1, -1, 2)),
    (SplittingType.RAMIFIED_1_21, (1, 1, 1)),
])
def test_theta_local(symbol, values):
    assert tuple(theta_local(symbol, m) for m in (1, 2, 3)) == values


def test_theta_requires_positive_power():
    with pytest.raises(InvalidInputError):
        theta_local(SplittingType.SPLIT_111, 0)


def test_theta_on_form(field_23):
    assert theta(field_23, 2, 1) == -1
    assert theta(field_23, 5, 1) == 0
    assert theta(field_23, 5, 2) == 2


def test_lambda_n_is_multiplicative(field_23):
    assert lambda_n(field_23, 1) == 1
    assert lambda_n(field_23, 2) == -1
    assert lambda_n(field_23, 23) == 1
    assert lambda_n(field_23, 46) == lambda_n(field_23, 2) * lambda_n(field_23, 23)


def test_lambda_table_matches_pointwise(field_23):
    table = lambda_table(field_23, 60)
    assert table[0] == 0
    assert [int(table[n]) for n in range(1, 61)] == [lambda_n(field_23, n) for n in range(1, 61)]


def test_maximal_form_has_trivial_e_factor(field_23):
    assert euler_factor(field_23, 5, 'E').coefficients == (1,)
    assert all(value == 0 for value in e_coeffs(field_23, 5, 6).values)


def test_subring_euler_factors(field_23):
    g = index_p_subrings(field_23, 5)[0]
    assert euler_factor(g, 5, 'L').coefficients == (1, 0, -1)
    assert euler_factor_identity(g, 5)
    e = euler_factor(g, 5, 'E')
    assert not e.inverse
    assert e.degree >= 1


def test_e_series_constant_term(field_23):
    g = index_p_subrings(field_23, 7)[0]
    values = e_coeffs(g, 7, 4).values
    polynomial = euler_factor(g, 7, 'E').coefficients
    e2 = (tuple(polynomial) + (0, 0))[2]
    assert values[0] == Fraction(e2, polynomial[0])


def test_unbalanced_expansion(field_23):
    g = index_p_subrings(field_23, 5)[0]
    expansion = UnbalancedExpansion.build(g, 20)
    assert expansion.index == 5
    assert expansion.radical == 5
    assert expansion.field_discriminant == -23
    assert all(k % 5 == 0 or k == 1 for k, _ in expansion.support(200))
    check = e_series_check(g, 0.3 + 0.1j, 30)
    assert check['difference'] < 1e-8


def test_unknown_factor_kind(field_23):
    with pytest.raises(InvalidInputError):
        euler_factor(field_23, 5, 'X')


def test_field_discriminant_sign(negative_records):
    for record in negative_records[:50]:
        if record.irreducible:
            assert field_discriminant_sign_ok(record.form)


def test_e_factor_shapes(negative_records):
    seen = set()
    for record in negative_records:
        if not record.irreducible:
            continue
        for p, exponent in factorint(abs(record.discriminant)).items():
            if exponent < 2 or is_maximal_at(record.form, p):
                continue
            assert euler_factor_identity(record.form, p)
            polynomial = euler_factor(record.form, p, 'E').coefficients
            assert polynomial in ALLOWED_E_POLYNOMIALS
            seen.add(polynomial)
    assert len(seen) > 1
