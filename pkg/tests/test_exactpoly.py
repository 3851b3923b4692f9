import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from zetamoments.exactpoly import (
    BivariatePolynomial,
    RationalPolynomial,
    gamma_coefficients,
    gamma_kn,
    gamma_kn_oracle,
    ks_gk,
    ks_partial_product,
    moment_constant_prediction,
    w_poly,
)

R = RationalPolynomial
eta = R.x()


def test_polynomial_basics():
    p = R([1, 2, 0, 0])
    assert p.coeffs == (1, 2) and p.degree == 1
    assert R([]) == 0 and R([]).degree == -1
    assert (p * p).coeffs == (1, 4, 4)
    assert (p - p) == 0
    assert p(Fraction(1, 2)) == 2
    assert (1 - eta).compose(1 - eta) == eta
    with pytest.raises(ValueError):
        p ** -1


rat = st.fractions(max_denominator=50).filter(lambda f: abs(f) < 100)
polys = st.lists(rat, max_size=5).map(R)


@given(polys, polys, polys)
def test_ring_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert a * b == b * a


@given(polys, polys, rat)
def test_evaluation_is_homomorphism(a, b, x):
    assert (a * b)(x) == a(x) * b(x)
    assert a.compose(b)(x) == a(b(x))


def test_bivariate_extraction():
    p = BivariatePolynomial.from_linear(1, -1, -1) ** 3
    # (1 - s - w)^3: coefficient of s w is 3!/(1!1!1!) * (-1)^2 = 6
    assert p.coefficient(1, 1) == 6
    assert p.coefficient(0, 3) == -1


def test_gamma_examples():
    assert gamma_kn(2, 1) == -4
    assert gamma_kn(2, 3) == -14
    assert gamma_kn_oracle(2, 0) == 2
    assert gamma_kn_oracle(2, 2) == 8
    for k in range(1, 7):
        assert gamma_kn(k, 0) == k


def test_gamma_oracle_full_loop():
    for k in range(1, 5):
        assert gamma_coefficients(k) == [gamma_kn_oracle(k, n) for n in range(k * k)]


def test_gamma_range_checked():
    with pytest.raises(ValueError):
        gamma_kn(2, 4)
    with pytest.raises(ValueError):
        gamma_kn_oracle(0, 0)


def test_w_small():
    assert w_poly(1) == 1
    assert w_poly(2).coeffs == (1, 4, -6, 4, -1)
    assert w_poly(4)(Fraction(1)) == 12012
    for k in range(1, 7):
        assert w_poly(k)[0] == 1
        assert w_poly(k).degree <= k * k


def test_w_identities():
    w2, w3 = w_poly(2), w_poly(3)
    assert w2 + (1 - eta) ** 4 == 2
    assert w3 + w3.compose(1 - eta) == 42
    assert w3(Fraction(1)) == 41


def test_w3_coefficients():
    # the last three terms differ in sign from the published polynomial
    assert w_poly(3).coeffs == (1, 9, 36, 84, 126, -630, 588, -180, 9, -2)


def test_variants_fail_w2():
    assert w_poly(2, "derivation").coeffs == (1, 2, -1, Fraction(-2, 3), Fraction(-13, 6))
    assert w_poly(2, "signed").coeffs != (1, 4, -6, 4, -1)
    with pytest.raises(ValueError):
        w_poly(2, "other")
    with pytest.raises(ValueError):
        w_poly(7)


def test_gamma_mutation_breaks_w2():
    tampered = w_poly(2, gamma_override={1: gamma_kn(2, 1) + 1})
    assert tampered.coeffs != (1, 4, -6, 4, -1)


@given(st.fractions(min_value=0, max_value=1, max_denominator=1000))
def test_moment_constant_k3(e):
    assert moment_constant_prediction(3, e) == 42


def test_moment_constant_errors():
    assert moment_constant_prediction(4, 1) == 24024
    with pytest.raises(ValueError):
        moment_constant_prediction(4, Fraction(1, 2))
    with pytest.raises(ValueError):
        moment_constant_prediction(3, 2)
    with pytest.raises(ValueError):
        moment_constant_prediction(2, 0)


def test_ks_values():
    assert [ks_gk(k) for k in range(1, 6)] == [1, 2, 42, 24024, 701149020]


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_ks_partial_products_converge(k):
    # error of the truncated product is about k^3 / N; Richardson removes it
    g = float(ks_gk(k))
    for N in (1000, 10000):
        assert abs(ks_partial_product(k, N) / g - 1) <= 1.5 * k**3 / N + 1e-12
    raw = ks_partial_product(k, 20000)
    rich = 2 * raw - ks_partial_product(k, 10000)
    # what remains after extrapolation is second order, about k^6 / N^2
    assert abs(rich / g - 1) <= max(1e-10, k**6 / 1e8)
    assert abs(rich / g - 1) <= abs(raw / g - 1)


def test_ks_growth():
    # log g_k / k^2 - log(k e^{1/2} / 4) shrinks monotonically toward 0
    gaps = [math.log(ks_gk(k)) / k**2 - math.log(k * math.exp(0.5) / 4) for k in range(2, 13)]
    assert all(a > b > 0 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < 0.05
    assert all(ks_gk(k) >= 2 ** (k * k) for k in range(5, 13))
    ratios = [math.log(ks_gk(k)) / (k * k * math.log(k)) for k in range(2, 13)]
    assert all(a < b < 1 for a, b in zip(ratios, ratios[1:]))
