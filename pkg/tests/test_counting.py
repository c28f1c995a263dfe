"""数え上げ・篩・留数汎関数のテスト"""
import math
from fractions import Fraction

import pytest

from modules.counting import (
    ORBIT_SCALE,
    DensityTable,
    SieveFunctional,
    accelerated_euler_product,
    b_value,
    closed_form_c_lambda,
    davenport_report,
    field_count,
    index_shape_report,
    polya_vinogradov_check,
    predicted_count,
    residue_constants,
    sieve_to_maximal,
    smoothed_count,
    suborder_check,
    suborder_count,
    suborder_zeta_coeffs,
    zeta_exponents,
)
from modules.fourier import lambda_function
from modules.local import ORBIT_ORDER, LocalWeight, SplittingType, index_p_subrings
from utils.config import LocalSpec
from utils.errors import InvalidInputError, PrecisionError

ONES = {s: Fraction(1) for s in ORBIT_ORDER}


def test_residue_constants():
    plus = residue_constants(1)
    minus = residue_constants(-1)
    assert plus.alpha == pytest.approx(math.pi**2 / 36)
    assert minus.alpha == pytest.approx(math.pi**2 / 12)
    assert plus.beta == minus.beta == pytest.approx(math.pi**2 / 12)
    assert plus.gamma < 0 and minus.gamma < 0
    assert minus.gamma == pytest.approx(math.sqrt(3) * plus.gamma)
    assert plus.orbit_alpha == pytest.approx(ORBIT_SCALE * plus.alpha)


def test_residue_constants_reject_bad_sign():
    with pytest.raises(InvalidInputError):
        residue_constants(0)


def test_b_values():
    assert b_value(SplittingType.SPLIT_111, 5) == 3
    assert b_value(SplittingType.RAMIFIED_1_21, 5) == Fraction(7, 6)


def test_density_table():
    table = DensityTable.for_prime(5)
    assert DensityTable.for_prime(5) is table
    assert table.b[SplittingType.SPLIT_111] == 3
    assert table.b[SplittingType.TOTALLY_RAMIFIED_1_3] == Fraction(1, 6)
    assert table.c_float(SplittingType.ZERO_0) == pytest.approx(5 ** (2 / 3))
    expected = (1 - 5 ** (-1 / 3)) * (1 + 1 / 5) / (1 - 1 / 25)
    assert table.c_float(SplittingType.INERT_3) == pytest.approx(expected)


@pytest.mark.parametrize('p', [2, 5, 7])
def test_functionals_of_one(p):
    assert SieveFunctional.A_p(ONES, p) == 1
    assert SieveFunctional.B_p(ONES, p) == 1
    assert SieveFunctional.C_p(ONES, p) == pytest.approx(1.0, abs=1e-12)


def test_empty_weight_has_unit_functionals():
    weight = LocalWeight()
    assert SieveFunctional.A(weight) == 1
    assert SieveFunctional.B(weight) == 1
    assert SieveFunctional.A_max(weight) == pytest.approx(1 / (math.pi**2 / 6 * 1.2020569031595942))


@pytest.mark.parametrize('p', [5, 7, 11])
def test_functionals_of_lambda(p):
    values = lambda_function(p, 1).to_local_weight(p).at(p)
    assert SieveFunctional.A_p(values, p) == Fraction(p * p - 1, p**3)
    assert SieveFunctional.B_p(values, p) == Fraction(p**3 - 1, p**3)
    assert SieveFunctional.C_p(values, p) == pytest.approx(closed_form_c_lambda(p), rel=1e-12)


def test_inclusion_exclusion():
    weight = lambda_function(5, 1).to_local_weight(5)
    check = SieveFunctional.inclusion_exclusion_check(weight, [2, 3])
    assert check['A_exact']
    assert check['C_difference'] < 1e-12


def test_zeta_exponents():
    assert zeta_exponents([Fraction(1), Fraction(-2), Fraction(1), Fraction(0)]) == {1: Fraction(2)}


def test_divergent_euler_product():
    with pytest.raises(PrecisionError):
        accelerated_euler_product([Fraction(1), Fraction(-2), Fraction(1)], 3, lambda p: 1.0, 10)


def test_zero_weight_counts_nothing(negative_records, sharp_weight):
    weight = LocalWeight.from_mapping({5: {}})
    assert smoothed_count(weight, sharp_weight, 1000, -1, negative_records) == 0.0


def test_smoothed_count_matches_window(negative_records, sharp_weight):
    expected = sum(1 / r.stabilizer_order for r in negative_records if 1000 <= -r.discriminant <= 2000)
    assert smoothed_count(LocalWeight(), sharp_weight, 1000, -1, negative_records) == pytest.approx(expected)


def test_predicted_count_positive(bump_weight):
    main, secondary = predicted_count(LocalWeight(), bump_weight, 1000, 1)
    assert main > 0
    assert secondary < 0


@pytest.mark.parametrize('k, scale', [(1, 5), (2, 50)])
def test_polya_vinogradov_report(negative_records, sharp_weight, k, scale):
    report = polya_vinogradov_check(5, sharp_weight, 1000, -1, negative_records, k)
    weight = lambda_function(5, k).to_local_weight(5)
    assert report.lhs == pytest.approx(smoothed_count(weight, sharp_weight, 1000, -1, negative_records))
    assert report.remainder == pytest.approx(report.lhs - report.main - report.secondary)
    assert report.ratio == pytest.approx(abs(report.remainder) / scale)


def test_sieve_is_exact(negative_records, sharp_weight):
    report = sieve_to_maximal(LocalWeight(), sharp_weight, 1000, -1, negative_records)
    assert report.exact
    assert not report.truncated
    assert report.per_q[1] >= report.direct


def test_sieve_rejects_bad_cut(negative_records, sharp_weight):
    with pytest.raises(InvalidInputError):
        sieve_to_maximal(LocalWeight(), sharp_weight, 1000, -1, negative_records, q_cut=0)


def test_davenport_and_index_reports(negative_records):
    davenport = davenport_report(negative_records, 2000, -1)
    assert all(row['C'] > 0 for row in davenport.values())
    shapes = index_shape_report(negative_records, 2000, -1)
    assert 2 in shapes
    assert (shapes[2]['m1'], shapes[2]['q1']) == (1, 2)


def test_field_count_restricted(negative_records, sharp_weight):
    everything = field_count(LocalSpec(sign=-1), sharp_weight, 1000, negative_records)
    inert = field_count(LocalSpec(sign=-1, allowed=((2, frozenset({'3'})),)), sharp_weight, 1000, negative_records)
    assert 0 < inert < everything


def test_suborder_coefficients(field_23):
    a = suborder_zeta_coeffs(field_23, 23)
    assert a[0] == 1
    assert a[1] == 0
    assert a[3] == 1
    assert a[4] == 1
    assert a[7] == 3
    assert a[22] == 2
    assert suborder_count(field_23, 8) == 7


def test_suborder_lattice_agreement(field_23):
    check = suborder_check(field_23, 12)
    assert check['zeta'] == check['lattice']


def test_suborder_check_requires_maximal(field_23):
    with pytest.raises(InvalidInputError):
        suborder_check(index_p_subrings(field_23, 5)[0], 10)
