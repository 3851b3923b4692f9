import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from zetamoments.arith import (
    DivisorTable,
    Factorization,
    SieveCapacityError,
    TableTooSmallError,
    brute_force_Dk,
    divisors,
    dk,
    dk_prime_power,
    euler_phi,
    factorize,
    mobius,
    mobius_table,
    primes_up_to,
    ramanujan_sum,
    ramanujan_sum_exponential,
    sieve_dk,
    smallest_prime_factor,
)


def test_factorize_small():
    assert factorize(1).factors == ()
    assert factorize(12).factors == ((2, 2), (3, 1))
    assert factorize(97).factors == ((97, 1),)
    assert factorize(2**10 * 3**3 * 101).factors == ((2, 10), (3, 3), (101, 1))


def test_factorization_validates():
    with pytest.raises(ValueError):
        Factorization(12, ((3, 1), (2, 2)))
    with pytest.raises(ValueError):
        Factorization(13, ((2, 2), (3, 1)))
    with pytest.raises(ValueError):
        factorize(0)


@given(st.integers(min_value=1, max_value=10**9))
@settings(max_examples=200, deadline=None)
def test_factorize_roundtrip(n):
    f = factorize(n)
    assert math.prod(p**a for p, a in f) == n


def test_dk_prime_power():
    assert dk_prime_power(2, 5) == 6
    assert dk_prime_power(3, 2) == 6
    assert dk_prime_power(0, 0) == 1 and dk_prime_power(0, 3) == 0
    assert dk(3, 12) == 18
    assert dk(1, 360) == 1
    assert dk(2, 360) == 24


@given(st.integers(1, 5000), st.integers(1, 5000))
@settings(max_examples=100, deadline=None)
def test_dk_multiplicative_and_submultiplicative(m, n):
    for k in (2, 3, 4):
        if math.gcd(m, n) == 1:
            assert dk(k, m * n) == dk(k, m) * dk(k, n)
        assert dk(k, m * n) <= dk(k, m) * dk(k, n)


def test_dk_matches_convolution():
    # d_3 = 1 * d_2
    for n in range(1, 300):
        assert dk(3, n) == sum(dk(2, d) for d in divisors(n))


def test_mobius_phi():
    assert [mobius(n) for n in range(1, 11)] == [1, -1, -1, 0, -1, 1, -1, 0, 0, 1]
    assert [euler_phi(n) for n in (1, 2, 9, 12, 97)] == [1, 1, 6, 4, 96]
    mu = mobius_table(1000)
    assert all(mu[n] == mobius(n) for n in range(1, 1001))


def test_ramanujan_sum_two_routes():
    assert ramanujan_sum(6, 4) == -1
    assert ramanujan_sum(1, 5) == 1
    for q in range(1, 40):
        for h in range(1, 13):
            assert ramanujan_sum(q, h) == round(ramanujan_sum_exponential(q, h))
        assert ramanujan_sum(q, q) == euler_phi(q)


def test_primes_and_spf():
    assert list(primes_up_to(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert primes_up_to(10**6).size == 78498
    spf = smallest_prime_factor(100)
    assert spf[91] == 7 and spf[97] == 97 and spf[64] == 2


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_sieve_matches_reference(k):
    t = sieve_dk(k, 20_000)
    rng = np.random.default_rng(k)
    for n in rng.integers(1, 20_001, 300):
        assert t[int(n)] == dk(k, int(n))
    assert t[0] == 0 and t[1] == 1


def test_sieve_is_read_only_and_capacity():
    t = sieve_dk(2, 1000)
    with pytest.raises(ValueError):
        t.values[5] = 0
    with pytest.raises(SieveCapacityError):
        sieve_dk(2, 10**12)


def test_sieve_overflow_detected():
    with pytest.raises(OverflowError):
        sieve_dk(200, 2**20)


def test_sieve_cache_roundtrip(tmp_path):
    a = sieve_dk(3, 5000, tmp_path)
    assert (tmp_path / "dk_k3_x5000.npy").exists()
    b = sieve_dk(3, 5000, tmp_path)
    assert np.array_equal(a.values, b.values)


def test_brute_force_small():
    t = sieve_dk(2, 100)
    assert brute_force_Dk(2, 10, 1, t) == 74
    assert brute_force_Dk(2, 10, 1, t) == sum(dk(2, n) * dk(2, n + 1) for n in range(1, 11))
    assert brute_force_Dk(2, 0.5, 1, t) == 0
    t1 = sieve_dk(1, 1000)
    assert brute_force_Dk(1, 500.7, 3, t1) == 500


def test_brute_force_errors():
    t = sieve_dk(2, 100)
    with pytest.raises(TableTooSmallError):
        brute_force_Dk(2, 100, 1, t)
    with pytest.raises(ValueError):
        brute_force_Dk(3, 10, 1, t)
    with pytest.raises(ValueError):
        brute_force_Dk(2, 10, 0, t)


def test_divisor_table_shape():
    with pytest.raises(ValueError):
        DivisorTable(2, 10, np.ones(5, dtype=np.int64))
