"""Truncated power series in s about 0 and the local factors built from them.

All coefficients live in a private mpmath context at 40 digits.  Series are
always expansions of something evaluated at 1 + s: ``g_local`` gives
g_k(1+s, p^a), ``G_series`` gives G_k(1+s, q), and ``zeta_shifted_pow`` gives
the entire function s^k zeta(1+s)^k.
"""

from __future__ import annotations

import math
import warnings
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from .arith import divisors, dk_prime_power, euler_phi, factorize, mobius

MP = mpmath.MPContext()
MP.dps = 40

DEFAULT_TOL = 1e-30

#: Stieltjes constants gamma_0 .. gamma_9 (Laurent coefficients of zeta at 1).
STIELTJES = tuple(
    MP.mpf(v)
    for v in (
        "0.577215664901532860606512090082402431042159",
        "-0.0728158454836767248605863758749013191377363",
        "-0.00969036319287231848453038603521252935906581",
        "0.0020538344203033458661600465427533842857158",
        "0.00232537006546730005746817017752606800090447",
        "0.000793323817301062701753334877444444830731539",
        "-0.000238769345430199609872421841908004277783715",
        "-0.000527289567057751046074097505478858281996253",
        "-0.000352123353803039509602052165001208741729181",
        "-0.0000343947744180880481779146237982273906207895",
    )
)

MAX_ZETA_ORDER = len(STIELTJES)

#: Cancellation budget for P_k: warn when |terms| / |result| exceeds this.
CANCELLATION_BUDGET = 1e20


class PrecisionWarning(UserWarning):
    pass


class TaylorSeries:
    """Coefficients c_0 .. c_{order-1} of a power series in s, truncated."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable):
        self.coeffs: tuple = tuple(MP.mpf(c) for c in coeffs)
        if not self.coeffs:
            raise ValueError("a TaylorSeries needs order >= 1")

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @classmethod
    def constant(cls, c, order: int) -> "TaylorSeries":
        return cls([c] + [0] * (order - 1))

    @classmethod
    def exp_linear(cls, a, order: int) -> "TaylorSeries":
        """exp(a s) truncated."""
        a = MP.mpf(a)
        out = [MP.one]
        for n in range(1, order):
            out.append(out[-1] * a / n)
        return cls(out)

    def __getitem__(self, i: int):
        return self.coeffs[i]

    def __repr__(self):
        return f"TaylorSeries({[MP.nstr(c, 12) for c in self.coeffs]})"

    def _check(self, other: "TaylorSeries") -> None:
        if other.order != self.order:
            raise ValueError(f"order mismatch {self.order} vs {other.order}")

    def __add__(self, other):
        if isinstance(other, TaylorSeries):
            self._check(other)
            return TaylorSeries(a + b for a, b in zip(self.coeffs, other.coeffs))
        c = list(self.coeffs)
        c[0] += other
        return TaylorSeries(c)

    __radd__ = __add__

    def __neg__(self):
        return TaylorSeries(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, TaylorSeries):
            other = MP.mpf(other)
            return TaylorSeries(c * other for c in self.coeffs)
        self._check(other)
        n = self.order
        a, b = self.coeffs, other.coeffs
        return TaylorSeries(MP.fsum(a[i] * b[m - i] for i in range(m + 1)) for m in range(n))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.reciprocal() ** (-e)
        out = TaylorSeries.constant(1, self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def reciprocal(self) -> "TaylorSeries":
        a = self.coeffs
        if a[0] == 0:
            raise ZeroDivisionError("series is not a unit")
        inv = [1 / a[0]]
        for m in range(1, self.order):
            inv.append(-MP.fsum(a[i] * inv[m - i] for i in range(1, m + 1)) / a[0])
        return TaylorSeries(inv)

    def __call__(self, s):
        s = MP.mpf(s)
        acc = MP.zero
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def truncate(self, order: int) -> "TaylorSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return TaylorSeries(self.coeffs[:order])

    def to_floats(self) -> list[float]:
        return [float(c) for c in self.coeffs]

    def to_strings(self, digits: int = 30) -> list[str]:
        return [MP.nstr(c, digits) for c in self.coeffs]


def zeta_em(s, N: int = 30, terms: int = 20):
    """Euler-Maclaurin zeta(s) for real s != 1 in the module context."""
    s = MP.mpf(s)
    total = MP.fsum(MP.power(n, -s) for n in range(1, N))
    Nm = MP.mpf(N)
    total += Nm ** (1 - s) / (s - 1) + Nm ** (-s) / 2
    rising = s  # s (s+1) ... (s+2j-2)
    for j in range(1, terms + 1):
        total += MP.bernoulli(2 * j) / MP.factorial(2 * j) * rising * Nm ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return total


def _zeta_one_plus_series_value(s):
    # zeta(1+s) - 1/s from the Stieltjes table
    return MP.fsum(
        (-1) ** n * g * MP.power(s, n) / MP.factorial(n) for n, g in enumerate(STIELTJES)
    )


@lru_cache(maxsize=None)
def validate_stieltjes() -> float:
    """Check the embedded constants against Euler-Maclaurin; return max error."""
    if abs(STIELTJES[0] - MP.euler) > MP.mpf(10) ** -38:
        raise RuntimeError("gamma_0 literal disagrees with Euler's constant")
    worst = MP.zero
    for s in ("0.1", "-0.1", "0.05", "0.2"):
        s = MP.mpf(s)
        err = abs(_zeta_one_plus_series_value(s) + 1 / s - zeta_em(1 + s))
        worst = max(worst, err)
    if worst > 1e-14:
        raise RuntimeError(f"Stieltjes table fails validation (err {worst})")
    return float(worst)


@lru_cache(maxsize=None)
def zeta_shifted_pow(k: int, order: int) -> TaylorSeries:
    """Series of s^k zeta(1+s)^k about s = 0."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if not 1 <= order <= MAX_ZETA_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_ZETA_ORDER}]")
    validate_stieltjes()
    base = [MP.one] + [
        (-1) ** n * STIELTJES[n] / MP.factorial(n) for n in range(order - 1)
    ]
    return TaylorSeries(base) ** k


def _check_tol(tol: float) -> None:
    if not tol > 0:
        raise ValueError("tol must be positive")


@lru_cache(maxsize=None)
def g_local(k: int, p: int, alpha: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    """Series of g_k(1+s, p^alpha) = (1-p^{-1-s})^k sum_j d_k(p^{j+alpha}) p^{-j(1+s)}.

    The j-sum stops once the tail of every retained coefficient is provably
    below ``tol``: the ratio of consecutive terms decreases in j, so the tail
    is dominated by a geometric series.
    """
    _check_tol(tol)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    if alpha == 0 or k == 0:
        return TaylorSeries.constant(1, order)
    lp = MP.log(p)
    pinv = MP.one / p

    def term_mag(j: int, n: int):
        # |coefficient of s^n| of d_k(p^{j+alpha}) p^{-j} exp(-j s log p)
        return dk_prime_power(k, j + alpha) * pinv**j * (j * lp) ** n / MP.factorial(n)

    acc = [MP.zero] * order
    j = 0
    while True:
        w = dk_prime_power(k, j + alpha) * pinv**j
        c = -j * lp
        t = w
        for n in range(order):
            acc[n] += t
            t = t * c / (n + 1)
        j += 1
        if j > 20_000:
            raise RuntimeError("g_local j-sum failed to converge")
        if j < 2:
            continue
        done = True
        for n in range(order):
            t0 = term_mag(j, n)
            r = term_mag(j + 1, n) / t0 if t0 else MP.zero
            if r >= 1 or t0 / (1 - r) >= tol:
                done = False
                break
        if done:
            break
    local = TaylorSeries.constant(1, order) - TaylorSeries.exp_linear(-lp, order) * pinv
    return local**k * TaylorSeries(acc)


def g_series(k: int, q: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    """g_k(1+s, q) as the product of its prime-power factors."""
    out = TaylorSeries.constant(1, order)
    for p, a in factorize(q):
        out = out * g_local(k, p, a, order, tol)
    return out


def G_series(k: int, q: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    """Series of G_k(1+s, q) from the double sum over d | q, e | d.

    G_k(s, q) = sum_{d|q} mu(d)/phi(d) d^s sum_{e|d} mu(e) e^{-s} g_k(s, qe/d),
    with d^{1+s} = d exp(s log d) and e^{-1-s} expanded likewise.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    total = TaylorSeries.constant(0, order)
    for d in divisors(q):
        md = mobius(d)
        if md == 0:
            continue
        outer = TaylorSeries.exp_linear(MP.log(d), order) * (MP.mpf(md * d) / euler_phi(d))
        inner = TaylorSeries.constant(0, order)
        for e in divisors(d):
            me = mobius(e)
            if me == 0:
                continue
            ee = TaylorSeries.exp_linear(-MP.log(e), order) * (MP.mpf(me) / e)
            inner = inner + ee * g_series(k, q * e // d, order, tol)
        total = total + outer * inner
    return total


def G_series_oracle(k: int, q: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    """G_k(1+s, q) from phi(q) q^{-s} G_k(s,q) = sum_{d|q} mu(q/d) d^{1-s} g_k(s,d).

    This single-sum form comes from collapsing the Ramanujan sum before
    summing over q, so it shares only g_local with :func:`G_series`.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    total = TaylorSeries.constant(0, order)
    for d in divisors(q):
        m = mobius(q // d)
        if m:
            total = total + TaylorSeries.exp_linear(-MP.log(d), order) * g_series(
                k, d, order, tol
            ) * m
    # at 1+s: q^{1+s} / phi(q)
    return total * TaylorSeries.exp_linear(MP.log(q), order) * (MP.mpf(q) / euler_phi(q))


def G_at_one_closed(k: int, p: int, alpha: int, tol: float = DEFAULT_TOL):
    """G_k(1, p^alpha) = (1-1/p)^{k-1} sum_j d_{k-1}(p^{alpha+j}) p^{-j}."""
    _check_tol(tol)
    if k < 1:
        raise ValueError("k must be >= 1")
    pinv = MP.one / p
    total = MP.zero
    j = 0
    while True:
        t = dk_prime_power(k - 1, alpha + j) * pinv**j
        total += t
        j += 1
        if j >= 2:
            nxt = dk_prime_power(k - 1, alpha + j) * pinv**j
            r = dk_prime_power(k - 1, alpha + j + 1) * pinv ** (j + 1) / nxt if nxt else 0
            if nxt == 0 or (r < 1 and nxt / (1 - r) < tol):
                break
    return (1 - pinv) ** (k - 1) * total


@lru_cache(maxsize=None)
def G_prime_power_series(k: int, p: int, alpha: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    """Cached G_series at a prime power, the building block for composite q."""
    return G_series(k, p**alpha, order, tol)


def G_series_multiplicative(k: int, q: int, order: int, tol: float = DEFAULT_TOL) -> TaylorSeries:
    out = TaylorSeries.constant(1, order)
    for p, a in factorize(q):
        out = out * G_prime_power_series(k, p, a, order, tol)
    return out


def P_k_coefficients(G: TaylorSeries, k: int) -> list:
    """b_0 .. b_{k-1} with P_k(x,q) = sum_i b_i L^{k-1-i}/(k-1-i)!, L = log(x/q).

    b is the product [s^k zeta^k(1+s)] * G_k(1+s, q), truncated at s^{k-1}.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if G.order < k:
        raise ValueError("series order too small for the residue")
    A = zeta_shifted_pow(k, G.order)
    return list((A * G).coeffs[:k])


def P_k_from_coefficients(b: Sequence, L):
    """Evaluate sum_i b_i L^{k-1-i}/(k-1-i)! in the module context."""
    k = len(b)
    L = MP.mpf(L)
    terms = [b[i] * L ** (k - 1 - i) / MP.factorial(k - 1 - i) for i in range(k)]
    value = MP.fsum(terms)
    scale = MP.fsum(abs(t) for t in terms)
    if scale and (value == 0 or scale / abs(value) > CANCELLATION_BUDGET) and scale > 1e-25:
        warnings.warn(
            f"P_k evaluation lost more than {math.log10(CANCELLATION_BUDGET):.0f} digits",
            PrecisionWarning,
            stacklevel=3,
        )
    return value


def P_k_eval(k: int, x: float, q: int, order: int | None = None, tol: float = DEFAULT_TOL) -> float:
    """Residue at s=0 of zeta^k(1+s) G_k(1+s,q) (x/q)^s, as a float."""
    if q < 1:
        raise ValueError("q must be >= 1")
    if not 1 <= k <= 4:
        raise ValueError("P_k_eval supports 1 <= k <= 4")
    if x <= 0:
        raise ValueError("x must be positive")
    order = order or k + 4
    b = P_k_coefficients(G_series_multiplicative(k, q, order, tol), k)
    return float(P_k_from_coefficients(b, MP.log(MP.mpf(x)) - MP.log(q)))


def _geometric_sum(term, start: int, tol: float, limit: int = 100_000):
    """Sum term(j) for j >= start, stopping on a geometric tail estimate.

    ``term`` must be eventually monotone in ratio; two consecutive ratios
    below one and a projected tail below tol end the loop.
    """
    total = MP.zero
    prev = None
    j = start
    while j < limit:
        t = term(j)
        total += t
        if prev:
            r = abs(t / prev)
            if r < 1 and abs(t) * r / (1 - r) < tol:
                return total
        prev = t
        j += 1
    raise RuntimeError("series failed to converge")


def hstar_local_factor(k: int, p: int, tol: float = 1e-25):
    """(1-1/p)^{(k-1)^2} sum_a (G_k(1,p^a)^2 - G_k(1,p^{a+1})^2 / p^2) / p^a.

    G values come from the constant term of :func:`G_series`, never from the
    d_k closed form, so this is an independent route to the a_k factor.
    """
    _check_tol(tol)

    @lru_cache(maxsize=None)
    def G1(a: int):
        return G_prime_power_series(k, p, a, 1, DEFAULT_TOL)[0]

    def term(a: int):
        return (G1(a) ** 2 - G1(a + 1) ** 2 / p**2) / MP.mpf(p) ** a

    return (1 - MP.one / p) ** ((k - 1) ** 2) * _geometric_sum(term, 0, tol)


def ak_local_factor(k: int, p: int, form: str = "eq10", tol: float = 1e-25):
    """Local factor of a_k at p in either Euler-product form.

    "eq10": (1-1/p)^{k^2} sum_r d_k(p^r)^2 / p^r  (infinite sum)
    "eq51": (1-1/p)^{(k-1)^2} sum_{r<k} C(k-1,r)^2 / p^r  (finite)
    """
    pinv = MP.one / p
    if form == "eq10":
        # ratio ((k+r)/(r+1))^2/p decreases in r, so the tail bound is rigorous
        total = MP.zero
        r = 0
        while True:
            total += dk_prime_power(k, r) ** 2 * pinv**r
            r += 1
            t = dk_prime_power(k, r) ** 2 * pinv**r
            ratio = MP.mpf(k + r) ** 2 / (r + 1) ** 2 * pinv
            if ratio < 1 and t / (1 - ratio) < tol:
                break
        return (1 - pinv) ** (k * k) * total
    if form == "eq51":
        total = MP.fsum(math.comb(k - 1, r) ** 2 * pinv**r for r in range(k))
        return (1 - pinv) ** ((k - 1) ** 2) * total
    raise ValueError(f"unknown form {form!r}")
