import math
import warnings

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from zetamoments.arith import factorize
from zetamoments.localseries import (
    STIELTJES,
    PrecisionWarning,
    TaylorSeries,
    G_at_one_closed,
    G_series,
    G_series_multiplicative,
    G_series_oracle,
    P_k_eval,
    P_k_from_coefficients,
    ak_local_factor,
    hstar_local_factor,
    validate_stieltjes,
    zeta_em,
    zeta_shifted_pow,
)

EULER_GAMMA = 0.5772156649015329


def close(a, b, tol):
    return abs(float(a) - float(b)) <= tol


coef = st.floats(-5, 5, allow_nan=False)
series = st.lists(coef, min_size=4, max_size=4).map(TaylorSeries)


@given(series, series, series)
@settings(max_examples=50, deadline=None)
def test_series_ring_laws(a, b, c):
    for x, y in zip((a * (b + c)).to_floats(), (a * b + a * c).to_floats()):
        assert abs(x - y) <= 1e-9 * (1 + abs(x))
    for x, y in zip((a * b).to_floats(), (b * a).to_floats()):
        assert abs(x - y) <= 1e-9 * (1 + abs(x))


def test_series_reciprocal_and_exp():
    a = TaylorSeries([2, 1, -3, 0.5, 7])
    one = (a * a.reciprocal()).to_floats()
    assert close(one[0], 1, 1e-30) and all(abs(c) < 1e-30 for c in one[1:])
    e = TaylorSeries.exp_linear(2, 16)
    assert close(e(0.1), math.exp(0.2), 1e-8)
    with pytest.raises(ZeroDivisionError):
        TaylorSeries([0, 1]).reciprocal()


def test_stieltjes_validation():
    assert validate_stieltjes() < 1e-15
    assert close(STIELTJES[0], EULER_GAMMA, 1e-16)


def test_zeta_em_against_mpmath():
    assert close(zeta_em(1.1), mpmath.zeta(1.1), 1e-10)
    assert close(zeta_em(2), math.pi**2 / 6, 1e-25)
    z = zeta_shifted_pow(1, 8)
    # s zeta(1+s) is analytic; compare at s = 0.1 with mpmath
    assert close(z(0.1), 0.1 * mpmath.zeta(1.1), 1e-12)
    with pytest.raises(ValueError):
        zeta_shifted_pow(2, 50)


def test_G_small_values():
    assert G_series(2, 1, 4).to_floats() == [1.0, 0.0, 0.0, 0.0]
    assert close(G_at_one_closed(3, 2, 1), 1.5, 1e-25)
    for p in (2, 3, 5, 7, 11):
        assert abs(G_at_one_closed(1, p, 1)) < 1e-25


@pytest.mark.parametrize("k", [2, 3, 4])
def test_G_closed_form_at_one(k):
    for p in (2, 3, 5, 7, 11, 13, 47):
        for alpha in range(1, 7):
            q = p**alpha
            direct = G_series(k, q, 3)[0]
            assert close(direct, G_at_one_closed(k, p, alpha), 1e-24)


@pytest.mark.parametrize("k", [2, 3, 4])
def test_G_double_sum_vs_single_sum(k):
    for q in (2, 6, 12, 30, 36, 60, 97):
        a = G_series(k, q, k + 3).to_floats()
        b = G_series_oracle(k, q, k + 3).to_floats()
        assert all(abs(x - y) <= 1e-20 * (1 + abs(x)) for x, y in zip(a, b))


@pytest.mark.parametrize("k", [2, 3])
def test_G_multiplicative(k):
    for q in range(2, 101):
        if len(factorize(q).factors) < 2:
            continue
        a = G_series(k, q, 4).to_floats()
        b = G_series_multiplicative(k, q, 4).to_floats()
        assert all(abs(x - y) <= 1e-20 * (1 + abs(x)) for x, y in zip(a, b))


def test_P_k_small_cases():
    assert P_k_eval(1, 1e4, 1) == 1.0
    assert abs(P_k_eval(1, 1e4, 3)) < 1e-20
    assert close(P_k_eval(2, 1e4, 1), math.log(1e4) + 2 * EULER_GAMMA, 1e-12)


def test_P_k_cancellation_warning():
    with pytest.warns(PrecisionWarning):
        P_k_from_coefficients([1e30, -1e30 + 1], 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        P_k_from_coefficients([1.0, 2.0], 3.0)


def test_P_k_rejects_large_k():
    with pytest.raises(ValueError):
        P_k_eval(5, 1e4, 1)


def test_local_factors_k2():
    # a_2 = 6 / pi^2, so the local factor is 1 - p^-2
    for p in (2, 3, 5, 101):
        for form in ("eq10", "eq51"):
            assert close(ak_local_factor(2, p, form), 1 - p**-2, 1e-24)


def test_local_factor_k3_rational():
    # sum d_3(p^j)^2 x^j = (1 + 4x + x^2) / (1 - x)^5
    for p in (2, 5, 13):
        x = 1 / p
        expected = (1 - x) ** 4 * (1 + 4 * x + x * x)
        assert close(ak_local_factor(3, p, "eq10"), expected, 1e-15)
        assert close(ak_local_factor(3, p, "eq51"), expected, 1e-15)


@pytest.mark.parametrize("k,p", [(2, 2), (3, 5), (4, 3)])
def test_hstar_chain(k, p):
    assert close(hstar_local_factor(k, p), ak_local_factor(k, p, "eq10"), 1e-20)


def test_local_factor_form_check():
    with pytest.raises(ValueError):
        ak_local_factor(2, 2, "eq99")
