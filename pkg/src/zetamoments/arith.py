"""Prime and divisor-function services.

Everything here is exact integer arithmetic.  The sieved table of d_k(n) is
the oracle behind every correlation check in the package, so it is built
once, frozen, and optionally cached on disk.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

#: Largest table the sieve will build (entries).  Beyond this we refuse
#: rather than let numpy die somewhere inside an allocation.
MAX_SIEVE = 400_000_000

CACHE_ENV = "ZETAMOMENTS_CACHE"

_INT64_MAX = np.iinfo(np.int64).max


class SieveCapacityError(MemoryError):
    """Requested table does not fit the configured capacity."""


class TableTooSmallError(ValueError):
    """A divisor table does not reach the index a caller needs."""


@dataclass(frozen=True)
class Factorization:
    n: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prod = 1
        last = 1
        for p, a in self.factors:
            if p <= last or a < 1:
                raise ValueError(f"non-canonical factorization {self.factors}")
            last = p
            prod *= p**a
        if prod != self.n:
            raise ValueError(f"factors multiply to {prod}, not {self.n}")

    @property
    def omega(self) -> int:
        return len(self.factors)

    @property
    def squarefree(self) -> bool:
        return all(a == 1 for _, a in self.factors)

    def __iter__(self):
        return iter(self.factors)


def factorize(n: int) -> Factorization:
    """Trial-division factorization; fine for the sizes used here (< 1e12)."""
    n = int(n)
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out = []
    m = n
    for p in (2, 3):
        if m % p == 0:
            a = 0
            while m % p == 0:
                m //= p
                a += 1
            out.append((p, a))
    p = 5
    step = 2
    while p * p <= m:
        if m % p == 0:
            a = 0
            while m % p == 0:
                m //= p
                a += 1
            out.append((p, a))
        p += step
        step = 6 - step
    if m > 1:
        out.append((m, 1))
    return Factorization(n, tuple(out))


def dk_prime_power(k: int, j: int) -> int:
    """d_k(p^j) = C(k+j-1, j).

    k = 0 is accepted as the Dirichlet identity (d_0(p^j) = [j == 0]); some
    closed forms for G_k use d_{k-1} and need it at k = 1.
    """
    if j < 0:
        raise ValueError("j must be >= 0")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return 1 if j == 0 else 0
    return math.comb(k + j - 1, j)


def dk(k: int, n: int) -> int:
    """d_k(n) from the factorization; the slow reference path."""
    out = 1
    for _, a in factorize(n):
        out *= dk_prime_power(k, a)
    return out


def mobius(n: int) -> int:
    f = factorize(n)
    if not f.squarefree:
        return 0
    return -1 if f.omega % 2 else 1


def euler_phi(n: int) -> int:
    out = n
    for p, _ in factorize(n):
        out -= out // p
    return out


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, a in factorize(n):
        divs = [d * p**e for d in divs for e in range(a + 1)]
    return sorted(divs)


def squarefree_divisors(n: int) -> list[int]:
    divs = [1]
    for p, _ in factorize(n):
        divs = divs + [d * p for d in divs]
    return sorted(divs)


def ramanujan_sum(q: int, h: int) -> int:
    """c_q(h) = sum over d | gcd(q, h) of d * mu(q/d)."""
    if q < 1 or h < 1:
        raise ValueError("ramanujan_sum needs q, h >= 1")
    return sum(d * mobius(q // d) for d in divisors(math.gcd(q, h)))


def ramanujan_sum_exponential(q: int, h: int) -> float:
    """Reference c_q(h) as the exponential sum over reduced residues mod q."""
    a = np.array([a for a in range(1, q + 1) if math.gcd(a, q) == 1], dtype=float)
    return float(np.cos(2 * np.pi * a * h / q).sum())


@lru_cache(maxsize=16)
def primes_up_to(n: int) -> np.ndarray:
    """All primes <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    s = np.ones(n + 1, dtype=bool)
    s[:2] = False
    s[4::2] = False
    for p in range(3, math.isqrt(n) + 1, 2):
        if s[p]:
            s[p * p :: 2 * p] = False
    out = np.nonzero(s)[0].astype(np.int64)
    out.setflags(write=False)
    return out


def smallest_prime_factor(n_max: int) -> np.ndarray:
    """spf[n] for 0 <= n <= n_max (spf[0] = spf[1] = 0)."""
    spf = np.zeros(n_max + 1, dtype=np.int64)
    for p in primes_up_to(math.isqrt(n_max)):
        p = int(p)
        block = spf[p * p :: p]
        block[block == 0] = p
    idx = np.arange(n_max + 1, dtype=np.int64)
    unset = spf == 0
    spf[unset] = idx[unset]
    spf[:2] = 0
    return spf


def mobius_table(n_max: int) -> np.ndarray:
    """mu(n) for 0 <= n <= n_max (mu[0] = 0), as int8."""
    mu = np.ones(n_max + 1, dtype=np.int8)
    mu[0] = 0
    for p in primes_up_to(n_max):
        p = int(p)
        mu[p::p] *= -1
        if p * p <= n_max:
            mu[p * p :: p * p] = 0
    return mu


def omega_table(n_max: int) -> np.ndarray:
    """Number of distinct prime factors, 0 <= n <= n_max."""
    w = np.zeros(n_max + 1, dtype=np.int8)
    for p in primes_up_to(n_max):
        w[int(p) :: int(p)] += 1
    return w


@dataclass(frozen=True, eq=False)
class DivisorTable:
    k: int
    x_max: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.values.shape != (self.x_max + 1,):
            raise ValueError("values must have length x_max + 1")
        self.values.setflags(write=False)

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return self.x_max + 1

    def require(self, n: int) -> None:
        if n > self.x_max:
            raise TableTooSmallError(
                f"d_{self.k} table covers n <= {self.x_max}, need {n}"
            )


def _sieve_values(k: int, x_max: int) -> np.ndarray:
    spf = smallest_prime_factor(x_max)
    n = np.arange(x_max + 1, dtype=np.int64)
    p = spf.copy()
    p[:2] = 1
    rest = n // p
    expo = np.ones(x_max + 1, dtype=np.int64)
    expo[:2] = 0
    active = (rest % p == 0) & (n >= 2)
    while active.any():
        idx = np.nonzero(active)[0]
        rest[idx] //= p[idx]
        expo[idx] += 1
        active[idx] = rest[idx] % p[idx] == 0
    rest[:2] = n[:2]

    top = int(expo.max()) if x_max >= 2 else 0
    lookup = np.array([dk_prime_power(k, j) for j in range(top + 1)], dtype=object)
    if max(lookup) > _INT64_MAX:
        raise OverflowError("d_k(p^j) does not fit in int64")
    lookup = lookup.astype(np.int64)
    local = lookup[expo]

    # d_k(n) = d_k(p^e) d_k(n / p^e); n / p^e has one prime factor fewer, so
    # after omega_max + 1 passes every entry is final.
    d = np.ones(x_max + 1, dtype=np.int64)
    d[0] = 0
    shadow = np.zeros(x_max + 1)  # log2 of d, to catch int64 overflow
    log_local = np.log2(np.maximum(local, 1).astype(float))
    while True:
        new = local * d[rest]
        new[0] = 0
        new[1] = 1
        if np.array_equal(new, d):
            break
        shadow = log_local + shadow[rest]
        if shadow.max() > 62:
            raise OverflowError(f"d_{k}(n) overflows int64 below {x_max}")
        d = new
    return d


def _cache_path(cache_dir, k: int, x_max: int) -> Path | None:
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV)
    if not cache_dir:
        return None
    return Path(cache_dir) / f"dk_k{k}_x{x_max}.npy"


def sieve_dk(k: int, x_max: int, cache_dir=None) -> DivisorTable:
    """Exact d_k(n) for all n <= x_max.

    When a cache directory is configured (argument, or the ZETAMOMENTS_CACHE
    environment variable) the table is stored as ``dk_k{k}_x{x_max}.npy``
    and re-read on later calls.
    """
    if k < 1 or x_max < 1:
        raise ValueError("sieve_dk needs k >= 1 and x_max >= 1")
    if x_max > MAX_SIEVE:
        raise SieveCapacityError(
            f"x_max={x_max} exceeds sieve capacity {MAX_SIEVE}"
        )
    path = _cache_path(cache_dir, k, x_max)
    if path is not None and path.exists():
        values = np.load(path, allow_pickle=False)
        if values.dtype == np.int64 and values.shape == (x_max + 1,):
            return DivisorTable(k, x_max, values)
    if k == 1:
        values = np.ones(x_max + 1, dtype=np.int64)
        values[0] = 0
    else:
        values = _sieve_values(k, x_max)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp.npy")
        np.save(tmp, values, allow_pickle=False)
        os.replace(tmp, path)
    return DivisorTable(k, x_max, values)


def brute_force_Dk(k: int, x: float, h: int, table: DivisorTable) -> int:
    """D_k(x, h) = sum_{n <= x} d_k(n) d_k(n + h), exactly."""
    if h < 1:
        raise ValueError("h must be >= 1")
    if table.k != k:
        raise ValueError(f"table is for d_{table.k}, asked for d_{k}")
    n_top = math.floor(x)
    if n_top < 1:
        return 0
    table.require(n_top + h)
    v = table.values
    vmax = int(v[1 : n_top + h + 1].max())
    # chunk so that a single int64 dot product cannot overflow
    chunk = max(1, min(1 << 20, _INT64_MAX // max(vmax * vmax, 1)))
    total = 0
    for lo in range(1, n_top + 1, chunk):
        hi = min(lo + chunk, n_top + 1)
        total += int(np.dot(v[lo:hi], v[lo + h : hi + h]))
    return total
