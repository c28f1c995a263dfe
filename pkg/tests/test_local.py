"""局所的な性質（分解型・極大性・スイッチング）のテスト"""
from fractions import Fraction

import pytest

from modules.forms import BinaryCubicForm, discriminant, stabilizer_order
from modules.local import (
    LocalWeight,
    SplittingType,
    count_index_p_overrings,
    count_index_p_subrings,
    index_p_subrings,
    is_maximal,
    is_maximal_at,
    maximalize,
    mobius,
    omega,
    overring_step,
    pair_stabilizer_order,
    qualifying_roots,
    splitting_symbol,
    splitting_type,
    switching_check,
    weighted_switching_check,
)
from utils.errors import InvalidInputError, InvalidRootError


def test_splitting_of_x3_minus_x():
    symbol, data = splitting_type(BinaryCubicForm(1, 0, -1, 0), 5)
    assert symbol == SplittingType.SPLIT_111
    assert [alpha for alpha, _ in data.roots] == [(0, 1), (1, 1), (4, 1)]
    assert data.omega == 3


@pytest.mark.parametrize('p, expected', [
    (2, SplittingType.INERT_3),
    (3, SplittingType.INERT_3),
    (5, SplittingType.PARTIAL_12),
    (23, SplittingType.RAMIFIED_1_21),
])
def test_splitting_of_field_23(field_23, p, expected):
    assert splitting_symbol(field_23, p) == expected


def test_large_prime_symbol_matches_scan(field_23):
    for p in (53, 59, 61, 67):
        assert splitting_symbol(field_23, p) == splitting_type(field_23, p)[0]


def test_zero_and_totally_ramified():
    assert splitting_symbol(BinaryCubicForm(5, 10, -15, 5), 5) == SplittingType.ZERO_0
    assert splitting_symbol(BinaryCubicForm(1, 0, 0, 7), 7) == SplittingType.TOTALLY_RAMIFIED_1_3


def test_omega_multiplies_over_primes():
    f = BinaryCubicForm(1, 0, -1, 0)
    assert omega(f, 35) == omega(f, 5) * omega(f, 7)


def test_mobius():
    assert [mobius(n) for n in (1, 2, 4, 6, 30)] == [1, -1, 0, 1, -1]


def test_maximality(field_23):
    assert is_maximal(field_23)
    assert is_maximal_at(field_23, 23)
    assert not is_maximal_at(BinaryCubicForm(25, 5, 1, 1), 5)
    assert not is_maximal_at(field_23.scale(3), 3)


def test_maximalize_index_two():
    result = maximalize(BinaryCubicForm(4, 2, 1, 1))
    assert result.index == 2
    assert result.field_discriminant == -83
    assert discriminant(result.maximal_form) == -83


def test_maximalize_rejects_reducible():
    with pytest.raises(InvalidInputError):
        maximalize(BinaryCubicForm(1, 0, -1, 0))


def test_subring_then_maximalize(field_23):
    subrings = index_p_subrings(field_23, 5)
    assert len(subrings) == 1
    g = subrings[0]
    assert discriminant(g) == -23 * 25
    assert not is_maximal_at(g, 5)
    result = maximalize(g)
    assert (result.index, result.field_discriminant) == (5, -23)


def test_overring_requires_qualifying_root(field_23):
    with pytest.raises(InvalidRootError):
        overring_step(field_23, 5, (2, 1))


def test_overring_inverts_subring(field_23):
    g = index_p_subrings(field_23, 7)[0]
    roots = qualifying_roots(g, 7)
    assert roots
    assert discriminant(overring_step(g, 7, roots[0])) == -23


@pytest.mark.parametrize('p', [2, 5, 7])
def test_subring_count_matches_roots(field_23, p):
    assert count_index_p_subrings(field_23, p) == len(index_p_subrings(field_23, p))


@pytest.mark.slow
@pytest.mark.parametrize('fixture', ['positive_records', 'negative_records'])
def test_subring_count_matches_roots_for_all_forms(request, fixture):
    for record in request.getfixturevalue(fixture):
        for p in (2, 3, 5):
            assert count_index_p_subrings(record.form, p) == len(index_p_subrings(record.form, p)), (record, p)


def test_overring_count(field_23):
    g = index_p_subrings(field_23, 7)[0]
    assert count_index_p_overrings(g, 7) == 1
    for p in (2, 5, 7):
        assert count_index_p_overrings(field_23, p) == 0


def test_field_discriminant_relation(negative_records):
    for record in negative_records:
        if not record.irreducible:
            continue
        result = maximalize(record.form)
        assert record.discriminant == result.index**2 * result.field_discriminant


def test_local_weight_product(field_23):
    weight = LocalWeight.from_mapping({
        2: {SplittingType.INERT_3: Fraction(1, 2)},
        5: {SplittingType.PARTIAL_12: Fraction(3)},
    })
    assert weight.primes == [2, 5]
    assert weight(field_23) == Fraction(3, 2)
    assert weight.restrict([2])(field_23) == Fraction(1, 2)


@pytest.mark.parametrize('q', [1, 2, 3, 5, 6, 7, 10])
def test_switching_identity(negative_records, q):
    report = switching_check(q, 2000, -1, negative_records)
    assert report.lhs == report.rhs
    assert report.stabilizer_mismatches == 0
    assert report.holds


@pytest.mark.parametrize('q', [2, 3, 5, 6, 7, 10])
def test_switching_identity_positive(positive_records, q):
    report = switching_check(q, 2000, 1, positive_records)
    assert report.stabilizer_mismatches == 0
    assert report.holds


def test_pair_stabilizer_of_reducible_form():
    f = BinaryCubicForm(1, -2, 1, -2)
    assert discriminant(f) == -100
    g = overring_step(f, 5, qualifying_roots(f, 5)[0])
    assert discriminant(g) == -4
    assert stabilizer_order(g) == 2
    assert stabilizer_order(f) == 1
    assert pair_stabilizer_order(f, 5, g) == 1


def test_switching_rejects_non_squarefree(negative_records):
    with pytest.raises(InvalidInputError):
        switching_check(4, 2000, -1, negative_records)


def test_weighted_switching(negative_records):
    weight = LocalWeight.from_mapping({
        5: {s: Fraction(1) for s in SplittingType if s != SplittingType.ZERO_0},
    })
    assert weighted_switching_check(5, weight, 2000, -1, negative_records).holds


def test_weighted_switching_simple_prime(negative_records):
    weight = LocalWeight.from_mapping({5: {SplittingType.RAMIFIED_1_21: Fraction(1)}})
    report = weighted_switching_check(5, weight, 2000, -1, negative_records)
    assert report.notes['d'] == 5
    assert report.holds
