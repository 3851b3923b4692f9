"""Exact rational algebra for the mean-value polynomials w_k(eta).

Rationals are ``fractions.Fraction``; polynomials are small immutable
coefficient tuples.  Nothing in this module touches floating point except
:func:`ks_partial_product`, which exists only to check the closed product
numerically.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping

Rational = Fraction

#: Formula variants for w_k.  Only "statement" reproduces the printed w_2;
#: the other two are kept so the discrepancy can be demonstrated.
W_VARIANTS = ("statement", "derivation", "signed")

MAX_W_K = 6


class RationalPolynomial:
    """Univariate polynomial with Fraction coefficients, lowest power first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        c = [Fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs: tuple[Fraction, ...] = tuple(c)

    @classmethod
    def constant(cls, c) -> "RationalPolynomial":
        return cls([c])

    @classmethod
    def x(cls) -> "RationalPolynomial":
        return cls([0, 1])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, i: int) -> Fraction:
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else Fraction(0)

    def __len__(self):
        return len(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, RationalPolynomial):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == RationalPolynomial.constant(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        return f"RationalPolynomial({[str(c) for c in self.coeffs]})"

    def _coerce(self, other) -> "RationalPolynomial":
        if isinstance(other, RationalPolynomial):
            return other
        return RationalPolynomial.constant(other)

    def __add__(self, other):
        o = self._coerce(other)
        n = max(len(self), len(o))
        return RationalPolynomial(self[i] + o[i] for i in range(n))

    __radd__ = __add__

    def __neg__(self):
        return RationalPolynomial(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if not self.coeffs or not o.coeffs:
            return RationalPolynomial()
        out = [Fraction(0)] * (len(self) + len(o) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(o.coeffs):
                    out[i + j] += a * b
        return RationalPolynomial(out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = RationalPolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x):
        acc = Fraction(0) if isinstance(x, (int, Fraction)) else 0 * x
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: "RationalPolynomial") -> "RationalPolynomial":
        acc = RationalPolynomial()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def to_strings(self) -> list[str]:
        return [str(c) for c in self.coeffs]


class BivariatePolynomial:
    """Sparse integer polynomial in two variables, {(i, j): coeff}."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[tuple[int, int], int] | None = None):
        self.terms = {key: v for key, v in (terms or {}).items() if v}

    @classmethod
    def from_linear(cls, c0: int, cs: int, cw: int) -> "BivariatePolynomial":
        return cls({(0, 0): c0, (1, 0): cs, (0, 1): cw})

    def __mul__(self, other: "BivariatePolynomial") -> "BivariatePolynomial":
        out: dict[tuple[int, int], int] = {}
        for (a, b), u in self.terms.items():
            for (c, d), v in other.terms.items():
                key = (a + c, b + d)
                out[key] = out.get(key, 0) + u * v
        return BivariatePolynomial(out)

    def __pow__(self, n: int) -> "BivariatePolynomial":
        result = BivariatePolynomial({(0, 0): 1})
        for _ in range(n):
            result = result * self
        return result

    def coefficient(self, i: int, j: int) -> int:
        return self.terms.get((i, j), 0)


def _multinomial(n: int, parts: tuple[int, ...]) -> int:
    # zero whenever any part is negative (or the parts do not sum to n)
    if n < 0 or any(p < 0 for p in parts) or sum(parts) != n:
        return 0
    out = math.factorial(n)
    for p in parts:
        out //= math.factorial(p)
    return out


def _check_gamma_args(k: int, n: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0 <= n <= k * k - 1:
        raise ValueError(f"n must lie in [0, {k * k - 1}] for k={k}")


def gamma_kn(k: int, n: int) -> int:
    """Integer coefficient gamma_k(n) from the multinomial closed form."""
    _check_gamma_args(k, n)
    if n == 0:
        return k
    total = 0
    for i in range(k + 1):
        for j in range(k + 1):
            m = _multinomial(n - 1, (i - 1, j - 1, n - i - j + 1))
            if m:
                total += math.comb(k, i) * math.comb(k, j) * m
    return -total if n % 2 else total


def gamma_kn_oracle(k: int, n: int) -> int:
    """gamma_k(n) by explicit coefficient extraction.

    For n >= 1 this is (-1)^n times the s^{k-1} w^{k-1} coefficient of
    (1-s-w)^{n-1} (1-s)^k (1-w)^k; the contour integral itself is the
    unsigned coefficient, the closed form carries the sign.  For n = 0 the
    double geometric series in (s+w) is expanded term by term.
    """
    _check_gamma_args(k, n)
    if n >= 1:
        poly = (
            BivariatePolynomial.from_linear(1, -1, -1) ** (n - 1)
            * BivariatePolynomial.from_linear(1, -1, 0) ** k
            * BivariatePolynomial.from_linear(1, 0, -1) ** k
        )
        c = poly.coefficient(k - 1, k - 1)
        return -c if n % 2 else c
    # n = 0: residue of (s+w)^m / (s^i w^j) needs m = i + j - 2
    total = 0
    s_plus_w = BivariatePolynomial.from_linear(0, 1, 1)
    for i in range(1, k + 1):
        for j in range(1, k + 1):
            m = i + j - 2
            c = (s_plus_w**m).coefficient(i - 1, j - 1)
            total += math.comb(k, i) * math.comb(k, j) * (-1) ** (i + j) * c
    return total


def gamma_coefficients(k: int) -> list[int]:
    return [gamma_kn(k, n) for n in range(k * k)]


def w_poly(
    k: int,
    variant: str = "statement",
    gamma_override: Mapping[int, int] | None = None,
) -> RationalPolynomial:
    """w_k(eta) as an exact polynomial in eta.

    ``variant`` selects between the stated formula and the two alternate
    readings ("derivation": an extra 1/(n+1) per term; "signed": an extra
    (-1)^n).  ``gamma_override`` replaces individual gamma_k(n) values and
    exists for mutation testing.
    """
    if not 1 <= k <= MAX_W_K:
        raise ValueError(f"w_poly supports 1 <= k <= {MAX_W_K}")
    if variant not in W_VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    K = k * k
    one_plus = RationalPolynomial([1, 1])
    # (1+eta)^K (1 - sum c_n (1 - (1+eta)^{-(n+1)}))
    #   = (1+eta)^K (1 - sum c_n) + sum c_n (1+eta)^{K-n-1}
    const = Fraction(1)
    tail = RationalPolynomial()
    for n in range(K):
        g = gamma_kn(k, n)
        if gamma_override and n in gamma_override:
            g = gamma_override[n]
        c = Fraction(math.comb(K, n + 1) * g)
        if variant == "derivation":
            c /= n + 1
        elif variant == "signed":
            c *= (-1) ** n
        const -= c
        tail = tail + one_plus ** (K - n - 1) * c
    return one_plus**K * const + tail


def moment_constant_prediction(k: int, eta) -> Fraction:
    """The moment constant implied by w_k: 42 for k = 3, 24024 for k = 4.

    k = 3 uses w_3(eta) + w_3(1 - eta) for any 0 <= eta <= 1; k = 4 only
    admits eta = 1 and returns 2 w_4(1).
    """
    eta = Fraction(eta)
    if k == 3:
        if not 0 <= eta <= 1:
            raise ValueError("k=3 needs 0 <= eta <= 1")
        w = w_poly(3)
        return w(eta) + w(1 - eta)
    if k == 4:
        if eta != 1:
            raise ValueError("k=4 is only defined at eta = 1")
        return 2 * w_poly(4)(Fraction(1))
    raise ValueError("moment_constant_prediction supports k in {3, 4}")


def ks_gk(k: int) -> Fraction:
    """Random-matrix moment constant Gamma(1+k^2) prod_{j<k} j!/(j+k)!."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = Fraction(math.factorial(k * k))
    for j in range(k):
        out *= Fraction(math.factorial(j), math.factorial(j + k))
    return out


def ks_partial_product(k: int, N: int) -> float:
    """Gamma(1+k^2) N^{-k^2} prod_{j<=N} Gamma(j)Gamma(j+2k)/Gamma(j+k)^2."""
    # the j-th factor is (j+k)_k / (j)_k; summing logs keeps it in range
    logs = [
        math.lgamma(j) + math.lgamma(j + 2 * k) - 2 * math.lgamma(j + k)
        for j in range(1, N + 1)
    ]
    total = math.fsum(logs) - k * k * math.log(N) + math.lgamma(1 + k * k)
    return math.exp(total)
