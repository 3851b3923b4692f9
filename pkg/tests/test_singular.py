import math

import numpy as np
import pytest

from zetamoments.arith import primes_up_to, sieve_dk
from zetamoments.singular import (
    SingularSeriesEngine,
    a_k_eval,
    correlation_report,
    f_bound_check,
    hstar_identity_report,
    log_factor_series,
    p_bound_check,
    proposition_trend,
)


@pytest.fixture(scope="module")
def e2():
    return SingularSeriesEngine(2)


@pytest.fixture(scope="module")
def table2():
    return sieve_dk(2, 10**6)


def sigma_m1(h):
    return sum(1 / d for d in range(1, h + 1) if h % d == 0)


def test_engine_rejects_bad_config():
    with pytest.raises(ValueError):
        SingularSeriesEngine(5)
    with pytest.raises(ValueError):
        SingularSeriesEngine(2, Q=0)


def test_fingerprint_depends_on_config(e2):
    assert e2.fingerprint == SingularSeriesEngine(2).fingerprint
    assert e2.fingerprint != SingularSeriesEngine(2, Q=1500).fingerprint


@pytest.mark.parametrize("h", [1, 2, 3, 6, 12])
def test_leading_log_coefficient_k2(e2, h):
    # sum_{n<=x} d(n) d(n+h) ~ (6/pi^2) sigma_{-1}(h) x log^2 x
    lead = e2.m_prime_log_polynomial(h).coef[2]
    assert lead == pytest.approx(6 / math.pi**2 * sigma_m1(h), rel=1e-5)


def test_increment_two_routes(e2):
    for h in (1, 4):
        gl = e2.m_k_increment(5e5, 1e6, h)
        exact = e2.m_k_increment_exact(5e5, 1e6, h)
        assert abs(gl.value - exact) <= 1e-6 * exact
        assert gl.extra["quad_err"] <= 1e-6 * exact


def test_Q_stability(e2):
    half = SingularSeriesEngine(2, Q=1500)
    for h in (1, 2, 6):
        a = e2.m_k_increment(5e5, 1e6, h).value
        b = half.m_k_increment(5e5, 1e6, h).value
        assert abs(a - b) <= 0.02 * a


def test_prime_power_symmetry(e2):
    # the density depends on h only through the local factors at primes dividing h
    a = e2.m_k_prime(1e5, 2).value
    b = e2.m_k_prime(1e5, 4).value
    c = e2.m_k_prime(1e5, 3).value
    assert a < b and a != c


def test_f1_is_exact():
    e1 = SingularSeriesEngine(1)
    res = f_bound_check(e1, [1e3, 1e4], [1, 2, 3])
    assert res["C"] == 1.0
    assert e1.f_k_eval(1e4, 2).value == 0.0
    assert e1.f_k_eval(1e4, 1).value == pytest.approx(6 / math.pi**2 * math.pi**2 / 6, rel=1e-9)


def test_f_uncertainty_covers_Q_change(e2):
    coarse = SingularSeriesEngine(2, Q=1500)
    for d in (1, 2, 3):
        a, b = e2.f_k_eval(1e4, d), coarse.f_k_eval(1e4, d)
        assert abs(a.value - b.value) <= a.uncertainty + b.uncertainty


def test_p_bound_stable(e2):
    res = p_bound_check(e2, q_max=300, x_exp_max=6)
    assert res["stable"]


def test_correlation_against_brute_force(e2, table2):
    rows = correlation_report(e2, [1e5, 1e6], [1, 2, 3], table2)
    for r in rows:
        assert abs(r.predicted - r.actual) <= r.uncertainty
        assert r.rel_err < 1e-3


def test_correlation_rejects_large_h(e2, table2):
    with pytest.raises(ValueError):
        correlation_report(e2, [1e4], [200], table2)


def test_log_factor_series_first_terms():
    for k in (2, 3, 4):
        c = log_factor_series(k, "eq51")
        assert c[0] == 0 and c[1] == 0
        assert c == log_factor_series(k, "eq10")


def test_a_k_values():
    a1 = a_k_eval(1, form="eq51")
    assert a1.value == 1.0
    a2 = a_k_eval(2)
    assert abs(a2.value - 6 / math.pi**2) <= max(a2.uncertainty, 1e-14)


def test_a3_against_rational_product():
    # (1 - 1/p)^4 (1 + 4/p + 1/p^2) over primes, with the c_2 tail taken from a_k_eval
    est = a_k_eval(3, form="eq51")
    ps = primes_up_to(10**6).astype(float)
    x = 1 / ps
    log_direct = math.fsum(4 * np.log1p(-x) + np.log1p(4 * x + x * x))
    assert abs(log_direct + est.extra["tail"] - est.extra["log_value"]) < 1e-11


def test_hstar_identity():
    rep = hstar_identity_report(3, [2, 3, 5, 7])
    assert rep["max_deviation"] < 1e-20
    assert rep["rows"][0]["hstar"] == pytest.approx(0.203125, abs=1e-15)


def test_proposition_guard_and_trend():
    with pytest.raises(ValueError):
        proposition_trend(k_max=10, P=100)
    rows = proposition_trend(k_max=20, P=10**5, ks=[5, 10, 20])
    ratios = [r["ratio"] for r in rows]
    assert ratios == sorted(ratios)
