"""Γ因子・AFE カーネル・中心値のテスト"""
import math

import pytest

from modules.analytic import (
    D_half,
    GammaFactor,
    S_of_f,
    SmoothWeight,
    afe_central_value,
    e_factor_at_half,
    g_mellin_check,
    get_kernel,
    h_transform_sup,
    mellin_identity_check,
    unbalanced_afe_residual,
    zeta_oracle_check,
)
from modules.forms import discriminant, enumerate_orbits
from modules.local import index_p_subrings, is_maximal, maximalize
from utils.errors import ConfigurationError, InvalidInputError


@pytest.mark.parametrize('name', ['bump', 'sharp'])
def test_smooth_weight_normalized(name):
    weight = SmoothWeight(name)
    assert weight.mellin(1).real == pytest.approx(1.0, abs=1e-9)
    assert float(weight(0.5)[()]) == 0.0


def test_unknown_smooth_weight():
    with pytest.raises(ConfigurationError):
        SmoothWeight('triangle')


def test_sharp_weight_log_moment():
    assert SmoothWeight('sharp').mellin_derivative_at_one() == pytest.approx(2 * math.log(2) - 1)


def test_gamma_factor_values():
    assert abs(GammaFactor(1)(2.0) - 1 / math.pi**2) < 1e-12
    assert abs(GammaFactor(-1)(1.0) - 1 / math.pi) < 1e-12
    with pytest.raises(InvalidInputError):
        GammaFactor(0)


@pytest.mark.parametrize('sign', [1, -1])
def test_kernel_limits(sign):
    kernel = get_kernel(sign)
    assert kernel.V_direct(1e-6)[0] == pytest.approx(1.0, abs=1e-2)
    assert abs(kernel.V_direct(10.0)[0]) < 1e-6
    assert kernel(0.5)[0] == pytest.approx(kernel.V_direct(0.5)[0], abs=1e-9)


def test_kernel_rejects_nonpositive():
    with pytest.raises(InvalidInputError):
        get_kernel(-1)(0.0)


def test_kernel_mellin_identity():
    assert mellin_identity_check(get_kernel(-1)) < 1e-6


@pytest.mark.parametrize('name', ['bump', 'sharp'])
def test_smoothed_kernel_mellin(name):
    weight = SmoothWeight(name)
    kernel = get_kernel(-1)
    assert g_mellin_check(weight, kernel) < 1e-8
    h = h_transform_sup(weight, kernel)
    assert h['points'] == 29
    assert h['sup'] > 0


def test_central_value_requires_maximal(field_23):
    g = index_p_subrings(field_23, 5)[0]
    with pytest.raises(InvalidInputError):
        afe_central_value(g)


def test_central_value_kernel_independent(field_23):
    constant = afe_central_value(field_23, get_kernel(-1, 'constant')).value
    cosine = afe_central_value(field_23, get_kernel(-1, 'cosine')).value
    assert constant == pytest.approx(cosine, abs=1e-8)


def test_zeta_oracle(field_23):
    check = zeta_oracle_check(field_23)
    assert check['difference'] < 1e-6


def test_s_and_d_on_maximal_form(field_23):
    L = afe_central_value(field_23).value
    assert 2 * S_of_f(field_23) == pytest.approx(L, abs=1e-12)
    assert e_factor_at_half(field_23) == 1
    assert D_half(field_23) == pytest.approx(L, abs=1e-12)


def test_kernel_sign_mismatch(field_23):
    with pytest.raises(InvalidInputError):
        afe_central_value(field_23, get_kernel(1))


@pytest.mark.parametrize('p', [5, 7])
def test_unbalanced_residual_vanishes(field_23, p):
    g = index_p_subrings(field_23, p)[0]
    assert discriminant(g) == -23 * p * p
    report = unbalanced_afe_residual(g)
    assert abs(report.residual) < 1e-8
    assert report.terms_k >= 1



def test_tail_bound_grows_with_conductor(field_23):
    kernel = get_kernel(-1)
    Y = kernel.cutoff()
    assert kernel.tail_integral(Y, 1e6) > kernel.tail_integral(Y, 1.0) > 0
    result = afe_central_value(field_23)
    assert result.converged
    assert result.tail_bound < 1e-8


def _nonmaximal_sample(records, count):
    """極大形式から指数 2, 3, 4, 6 の部分環をとる"""
    forms = []
    for record in records:
        if not record.irreducible or not is_maximal(record.form):
            continue
        for path in ((2,), (3,), (2, 2), (2, 3)):
            f = record.form
            for p in path:
                subrings = index_p_subrings(f, p)
                if not subrings:
                    break
                f = subrings[0]
            else:
                forms.append(f)
        if len(forms) >= count:
            break
    return forms[:count]


@pytest.mark.slow
def test_unbalanced_residual_on_many_indices(negative_records, positive_records):
    forms = _nonmaximal_sample(negative_records, 25) + _nonmaximal_sample(positive_records, 25)
    assert len(forms) == 50
    assert {2, 3, 4, 6} <= {maximalize(f).index for f in forms}
    for f in forms:
        assert abs(discriminant(f)) < 10**5
        assert abs(unbalanced_afe_residual(f).residual) < 1e-8, f


@pytest.mark.slow
@pytest.mark.parametrize('sign', [1, -1])
def test_central_value_kernel_independent_on_many_fields(sign):
    records = enumerate_orbits(10**4, sign, workers=1)
    fields = [r.form for r in records if r.irreducible and is_maximal(r.form)][:50]
    assert len(fields) == 50
    for f in fields:
        constant = afe_central_value(f, get_kernel(sign, 'constant')).value
        cosine = afe_central_value(f, get_kernel(sign, 'cosine')).value
        assert constant == pytest.approx(cosine, abs=1e-8), f
