"""二元三次形式の基本演算のテスト"""
from itertools import product

import numpy as np
import pytest

from modules.forms import (
    SWAP,
    BinaryCubicForm,
    DualForm,
    GL2Element,
    act,
    act_dual,
    are_equivalent,
    discriminant,
    dual_discriminant,
    dual_pairing,
    enumerate_orbits,
    is_irreducible,
    is_reduced,
    reduce_form,
    small_matrices,
    stabilizer_order,
)
from utils.errors import ConfigurationError, InvalidElementError, InvalidInputError


@pytest.mark.parametrize('coefficients, expected', [
    ((1, 0, -1, 0), 4),
    ((1, 0, -1, -1), -23),
    ((1, 1, -2, -1), 49),
    ((1, 0, 0, 0), 0),
])
def test_discriminant(coefficients, expected):
    assert discriminant(BinaryCubicForm(*coefficients)) == expected


def test_swap_twists_by_determinant():
    f = BinaryCubicForm(1, 2, 3, 4)
    assert act(SWAP, f).coefficients == (-4, -3, -2, -1)


def test_identity_action():
    f = BinaryCubicForm(3, -1, 4, 1)
    assert act(GL2Element.identity(), f) == f


def test_singular_matrix_rejected():
    with pytest.raises(InvalidElementError):
        GL2Element(1, 2, 2, 4)


def test_discriminant_invariant_under_action():
    rng = np.random.default_rng(0)
    matrices = small_matrices()
    for _ in range(100):
        f = BinaryCubicForm(*(int(x) for x in rng.integers(-9, 10, size=4)))
        gamma = matrices[int(rng.integers(len(matrices)))]
        assert discriminant(act(gamma, f)) == discriminant(f)


def test_pairing_invariant_under_sl2_mod_p():
    p = 101
    generators = (GL2Element(1, 1, 0, 1, p), GL2Element(1, 0, 1, 1, p))
    rng = np.random.default_rng(1)
    for _ in range(30):
        gamma = GL2Element.identity(p)
        for k in rng.integers(2, size=5):
            gamma = gamma @ generators[int(k)]
        f = BinaryCubicForm(*(int(x) for x in rng.integers(p, size=4)))
        f_star = DualForm(*(int(x) for x in rng.integers(p, size=4)))
        before = dual_pairing(f, f_star, p)
        after = dual_pairing(act(gamma, f), act_dual(gamma, f_star), p)
        assert after % p == before % p


@pytest.mark.parametrize('coefficients', [(1, 0, 0, 1), (1, 1, -1, 2), (2, -1, 3, 5)])
def test_dual_discriminant_scales(coefficients):
    f_star = DualForm(*coefficients)
    assert discriminant(f_star.integral_form()) == 27 * dual_discriminant(f_star)


def test_irreducibility():
    assert is_irreducible(BinaryCubicForm(1, 0, -1, -1))
    assert not is_irreducible(BinaryCubicForm(1, 0, -1, 0))
    with pytest.raises(InvalidInputError):
        is_irreducible(BinaryCubicForm(0, 0, 0, 0))


def test_cyclic_cubic_has_stabilizer_three():
    assert stabilizer_order(BinaryCubicForm(1, 1, -2, -1)) == 3


def test_reduce_form_stays_in_orbit():
    f = act(GL2Element(2, 1, 1, 1), BinaryCubicForm(1, 0, -1, -1))
    g = reduce_form(f)
    assert is_reduced(g)
    assert discriminant(g) == -23
    assert are_equivalent(f, BinaryCubicForm(1, 0, -1, -1))


def test_enumeration_contains_known_orbits():
    negative = list(enumerate_orbits(24, -1, workers=1))
    assert [r.discriminant for r in negative].count(-23) == 1
    record = next(r for r in negative if r.discriminant == -23)
    assert record.irreducible
    assert are_equivalent(record.form, BinaryCubicForm(1, 0, -1, -1))

    positive = list(enumerate_orbits(5, 1, workers=1))
    assert any(r.discriminant == 4 and not r.irreducible for r in positive)


def test_enumeration_is_sorted(negative_records):
    keys = [r.sort_key() for r in negative_records]
    assert keys == sorted(keys)
    assert all(-2000 < r.discriminant < 0 for r in negative_records)


def test_enumeration_rejects_bad_sign():
    with pytest.raises(ConfigurationError):
        list(enumerate_orbits(100, 0))


def test_action_composition():
    rng = np.random.default_rng(2)
    matrices = small_matrices()
    for _ in range(50):
        g1 = matrices[int(rng.integers(len(matrices)))]
        g2 = matrices[int(rng.integers(len(matrices)))]
        f = BinaryCubicForm(*(int(x) for x in rng.integers(-5, 6, size=4)))
        f_star = DualForm(*(int(x) for x in rng.integers(-5, 6, size=4)))
        assert act(g2, act(g1, f)) == act(g2 @ g1, f)
        assert act_dual(g2, act_dual(g1, f_star)) == act_dual(g2 @ g1, f_star)


def test_pairing_twisted_by_determinant():
    rng = np.random.default_rng(3)
    matrices = small_matrices()
    flips = [gamma for gamma in matrices if gamma.det == -1]
    assert flips
    for _ in range(50):
        gamma = flips[int(rng.integers(len(flips)))] @ matrices[int(rng.integers(len(matrices)))]
        f = BinaryCubicForm(*(int(x) for x in rng.integers(-5, 6, size=4)))
        f_star = DualForm(*(int(x) for x in rng.integers(-5, 6, size=4)))
        before = dual_pairing(f, f_star)
        assert dual_pairing(act(gamma, f), act_dual(gamma, f_star)) == gamma.det * before


def _box_forms(bound, X, sign):
    for coefficients in product(range(-bound, bound + 1), repeat=4):
        f = BinaryCubicForm(*coefficients)
        if 0 < sign * discriminant(f) < X:
            yield f


def _assert_complete(records, bound, X, sign):
    canonical = {reduce_form(r.form) for r in records}
    assert len(canonical) == len(records)
    missing = [f for f in _box_forms(bound, X, sign) if reduce_form(f) not in canonical]
    assert not missing


@pytest.mark.parametrize('sign, fixture', [(1, 'positive_records'), (-1, 'negative_records')])
def test_enumeration_is_complete_on_box(request, sign, fixture):
    _assert_complete(request.getfixturevalue(fixture), 3, 2000, sign)


@pytest.mark.slow
@pytest.mark.parametrize('sign, fixture', [(1, 'positive_records'), (-1, 'negative_records')])
def test_enumeration_is_complete_on_large_box(request, sign, fixture):
    _assert_complete(request.getfixturevalue(fixture), 6, 2000, sign)
