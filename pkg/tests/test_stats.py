"""族の統計（t_Σ・モーメント・1レベル密度）のテスト"""
import math
from fractions import Fraction

import pandas as pd
import pytest

from modules.counting import residue_constants
from modules.stats import (
    DensityTestFunction,
    FamilyAverages,
    MomentResult,
    c_sigma_constants,
    family_fields,
    first_moment,
    l_value_table,
    local_factor_positive,
    ma_pa_sums,
    moment_slope,
    nonvanishing_report,
    one_level_density,
    t_sigma,
    t_sigma_n,
    t_sigma_size_report,
    theta_square_report,
    window_fields,
)
from utils.config import LocalSpec, parse_local_spec
from utils.errors import InvalidTestFunctionError, PartialDataError

UNRESTRICTED = LocalSpec(sign=-1)
INERT_AT_5 = parse_local_spec('sign=-1;5:3')


def test_t_sigma_trivial_power():
    assert t_sigma(UNRESTRICTED, 7, 0) == 1


@pytest.mark.parametrize('p', [2, 5, 11])
def test_t_sigma_unrestricted(p):
    assert t_sigma(UNRESTRICTED, p, 1) == Fraction(p, p * p + p + 1)
    assert t_sigma(UNRESTRICTED, p, 2) == Fraction(p * (p + 1), p * p + p + 1)


def test_t_sigma_inert():
    assert t_sigma(INERT_AT_5, 5, 1) == -1
    assert t_sigma(INERT_AT_5, 5, 2) == 0
    assert t_sigma_n(INERT_AT_5, 10) == -t_sigma(INERT_AT_5, 2, 1)


def test_local_factor_positive():
    assert local_factor_positive(INERT_AT_5, 5)
    assert local_factor_positive(UNRESTRICTED, 2)


def test_t_sigma_size():
    report = t_sigma_size_report(UNRESTRICTED, 200)
    assert report['t_p_constant'] < 1
    assert report['t_p2_constant'] < 1


def test_c_sigma_constants():
    averages = c_sigma_constants(INERT_AT_5)
    assert averages.c_sigma > 0
    assert math.isfinite(averages.c_prime_sigma)
    assert averages.details['residue_doubled_cutoff'] == pytest.approx(averages.residue, rel=1e-6)


def test_density_support_limit():
    with pytest.raises(InvalidTestFunctionError):
        DensityTestFunction('fejer', 0.5)


def test_fejer_test_function():
    phi = DensityTestFunction('fejer', 0.3)
    assert phi.check()
    assert phi(0.0) == pytest.approx(0.3)
    assert phi.prediction() == pytest.approx(0.85)
    assert float(phi.hat(0.3)) == 0.0


def test_bump_test_function():
    phi = DensityTestFunction('bump', 0.25)
    assert phi.check()
    assert 0 < phi.prediction() < 1


def test_zero_test_function_gives_zero(negative_records, bump_weight):
    phi = DensityTestFunction('fejer', 1 / 3, scale=0.0)
    result = one_level_density(UNRESTRICTED, phi, 1000, negative_records, bump_weight)
    assert result.value == 0.0
    assert result.fields > 0


def test_one_level_density_terms(negative_records, bump_weight):
    phi = DensityTestFunction('fejer', 1 / 3)
    result = one_level_density(INERT_AT_5, phi, 1000, negative_records, bump_weight)
    assert result.z1 == pytest.approx(1.0, abs=0.2)
    assert result.value == pytest.approx(result.z1 + result.z2)
    assert list(result.terms.columns) == ['p', 'm', 'theta_average', 'term']


def test_family_fields_are_maximal(negative_records, bump_weight):
    fields = family_fields(INERT_AT_5, negative_records, bump_weight, 1000)
    assert fields
    for record, weight in fields:
        assert record.irreducible
        assert weight > 0
        assert 1000 <= -record.discriminant <= 2000


def test_window_fields_and_l_value_table(negative_records):
    fields = window_fields(UNRESTRICTED, negative_records, 20, 45)
    assert [record.discriminant for record in fields] == [-23, -31, -44]
    table = l_value_table(fields)
    assert list(table.columns) == ['field_disc', 'L_half', 'S_f', 'converged', 'tail_bound']
    assert list(table['field_disc']) == [-23, -31, -44]
    assert table['converged'].all()


def test_theta_square_report(negative_records, bump_weight):
    df = theta_square_report(UNRESTRICTED, bump_weight, 1000, negative_records, [5, 7])
    assert list(df.columns) == ['p', 'average', 'deviation', 'scaled']
    assert list(df['p']) == [5, 7]


def _averages():
    return FamilyAverages(UNRESTRICTED, 1.0, 1.0, 0.0, 1.0, residue_constants(-1))


def test_first_moment_with_given_values(negative_records, bump_weight):
    fields = family_fields(UNRESTRICTED, negative_records, bump_weight, 1000)
    values = {record.form.coefficients: 1.0 for record, _ in fields}
    result = first_moment(UNRESTRICTED, bump_weight, 1000, negative_records, values, averages=_averages())
    assert result.value == pytest.approx(sum(w for _, w in fields))
    assert result.prediction == pytest.approx(1000 * (math.log(1000) + bump_weight.mellin_derivative_at_one()))
    assert len(result.table) == len(fields)


def test_first_moment_missing_values(negative_records, bump_weight):
    with pytest.raises(PartialDataError) as excinfo:
        first_moment(UNRESTRICTED, bump_weight, 1000, negative_records, {}, averages=_averages())
    assert excinfo.value.missing


def test_moment_slope():
    empty = pd.DataFrame()
    results = [
        MomentResult(math.e, math.e * 1.0, 0.0, empty, _averages()),
        MomentResult(math.e**2, math.e**2 * 2.0, 0.0, empty, _averages()),
    ]
    assert moment_slope(results) == pytest.approx(1.0)
    with pytest.raises(PartialDataError):
        moment_slope(results[:1])


def test_ma_pa_identity():
    table = pd.DataFrame({'field_disc': [-12, -15, -25], 'L_half': [1.5, -0.5, 2.0]})
    sums = ma_pa_sums(table, 10)
    assert sums['MA'] == pytest.approx(2.0)
    assert sums['PA'] == pytest.approx(1.5)
    assert sums['A'] == pytest.approx(1.0)
    assert sums['PA_wide'] == pytest.approx(3.5)
    assert sums['identity_gap'] == pytest.approx(0.0)
    assert sums['bound_holds']


def test_nonvanishing_report():
    table = pd.DataFrame({'field_disc': [-12, -15, -18], 'L_half': [1.5, -0.5, 0.0]})
    report = nonvanishing_report(table, 10)
    assert (report['positive'], report['negative'], report['vanishing']) == (1, 1, 1)
    assert report['delta'] == 0.0
