"""Singular series for shifted divisor correlations and the constants a_k.

For fixed k the engine turns every modulus m into the coefficient vector
b(m) of P_k(x, m) = sum_i b_i L^{k-1-i}/(k-1-i)!, L = log(x/m).  From there
f_k(x, d) = sum_q mu(q) q^{-2} P_k(x, qd)^2 is a vectorised numpy sum and
m_k'(x, h) = sum_{d|h} f_k(x, d)/d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from . import localseries as ls
from .arith import (
    DivisorTable,
    brute_force_Dk,
    divisors,
    dk,
    mobius_table,
    primes_up_to,
    sieve_dk,
)
from .report import PredictionReport, fingerprint

MAX_ENGINE_K = 4
QUAD_RULE = "gauss-legendre-8/log-panels"
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(8)
_EPS = np.finfo(float).eps
NOISE_FLOOR_FACTOR = 1e5


@dataclass(frozen=True)
class Estimate:
    value: float
    uncertainty: float
    diagnostics: tuple[str, ...] = ()
    extra: dict = field(default_factory=dict, compare=False)


class SingularSeriesEngine:
    """Configuration plus caches for P_k, f_k and m_k' at one k.

    ``Q`` is the cutoff of the q-sum in f_k (squarefree q only), ``order``
    the series order for G_k, ``tol`` the truncation tolerance for local
    sums.  ``rtol_target``, if given, turns an uncertainty larger than
    rtol_target * |value| into a diagnostic.
    """

    def __init__(self, k: int, Q: int = 3000, order: int | None = None,
                 tol: float = ls.DEFAULT_TOL, quad_rtol: float = 1e-6,
                 rtol_target: float | None = None):
        if not 1 <= k <= MAX_ENGINE_K:
            raise ValueError(f"engine supports 1 <= k <= {MAX_ENGINE_K}")
        if Q < 1:
            raise ValueError("Q must be >= 1")
        self.k = k
        self.Q = int(Q)
        self.order = order or k + 4
        if self.order < k:
            raise ValueError("order must be >= k")
        self.tol = tol
        self.quad_rtol = quad_rtol
        self.rtol_target = rtol_target
        mu = mobius_table(self.Q)
        self.q = np.nonzero(mu)[0].astype(np.int64)
        self.mu = mu[self.q].astype(float)
        self._b: dict[int, np.ndarray] = {}
        self._C: float | None = None

    @property
    def config(self) -> dict:
        return {
            "k": self.k,
            "Q": self.Q,
            "order": self.order,
            "tol": self.tol,
            "quad_rtol": self.quad_rtol,
            "rule": QUAD_RULE,
        }

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.config)

    # -- P_k -----------------------------------------------------------------

    def b_coefficients(self, m: int) -> np.ndarray:
        """b_0 .. b_{k-1} for modulus m (cached; built multiplicatively)."""
        b = self._b.get(m)
        if b is None:
            G = ls.G_series_multiplicative(self.k, m, self.order, self.tol)
            b = np.array([float(c) for c in ls.P_k_coefficients(G, self.k)])
            # anything this small is truncation residue of an exact zero
            # (e.g. G_1(1, q) = 0 for q > 1)
            b[np.abs(b) < NOISE_FLOOR_FACTOR * self.tol] = 0.0
            b.setflags(write=False)
            self._b[m] = b
        return b

    def _b_matrix(self, ms: np.ndarray) -> np.ndarray:
        return np.stack([self.b_coefficients(int(m)) for m in ms])

    def _P_matrix(self, B: np.ndarray, ms: np.ndarray, xs: np.ndarray) -> np.ndarray:
        # P[i, j] = P_k(xs[j], ms[i])
        L = np.log(xs)[None, :] - np.log(ms.astype(float))[:, None]
        k = self.k
        out = np.zeros_like(L)
        for i in range(k):
            e = k - 1 - i
            out += B[:, i : i + 1] * L**e / math.factorial(e)
        return out

    def P(self, x: float, m: int) -> float:
        return float(self._P_matrix(self.b_coefficients(m)[None, :], np.array([m]), np.array([float(x)]))[0, 0])

    def bound_constant(self) -> float:
        """Fitted C with |P_k(x,m)| <= C d_{k-1}(m) log^{k-1}(m x), times 1.25.

        Fitted over m <= 1000 and x in {1e3, ..., 1e8}.  The d_{k-1} form is
        the one that appears inside the proof of the P_k bound; it makes the
        k = 1 tail vanish identically.
        """
        if self._C is None:
            self._C = 1.25 * p_bound_constant(self, range(1, 1001), [10.0**e for e in range(3, 9)])
        return self._C

    # -- f_k -----------------------------------------------------------------

    @lru_cache(maxsize=None)
    def _tail_weights(self):
        """Weights mu^2(q) d_{k-1}(q)^2 q^{-2} for Q < q <= 20Q, plus the density fit."""
        k = self.k
        Y = 20 * self.Q
        if k == 1:
            return np.zeros(0, dtype=np.int64), np.zeros(0), Y, 0.0, 0
        mu = mobius_table(Y)
        dk1 = sieve_dk(k - 1, Y).values
        qs = np.arange(self.Q + 1, Y + 1, dtype=np.int64)
        a = (mu[qs] != 0) * dk1[qs].astype(float) ** 2
        w = a / qs.astype(float) ** 2
        # A(y) = sum_{q<=y} mu^2 d_{k-1}^2 ~ c y log^beta y; take the worst c on [Q, Y]
        beta = (k - 1) ** 2 - 1
        full = (mu[1:] != 0) * dk1[1:].astype(float) ** 2
        A = np.cumsum(full)
        ys = np.arange(1, Y + 1, dtype=float)
        sel = ys >= self.Q
        c = float(np.max(A[sel] / (ys[sel] * np.log(ys[sel]) ** beta))) * 1.1
        return qs, w, Y, c, beta

    def _tail_bound(self, x: float, d: int) -> float:
        """Bound on sum_{q>Q} |mu(q)| q^{-2} P_k(x, qd)^2."""
        if self.k == 1:
            return 0.0
        dd = dk(self.k - 1, d)
        if dd == 0:
            return 0.0
        qs, w, Y, c, beta = self._tail_weights()
        e = 2 * self.k - 2
        explicit = float(np.sum(w * np.log(qs * float(d) * x) ** e))

        # beyond Y, with y = e^t the density integral is a polynomial in t
        # against e^{-t}: int_a^inf p(t) e^{-t} dt = e^{-a} sum_j p^(j)(a)
        Poly = np.polynomial.Polynomial
        dens = Poly([0.0] * beta + [1.0]) + (Poly([0.0] * (beta - 1) + [beta]) if beta else 0)
        poly = c * dens * Poly([math.log(d * x), 1.0]) ** e
        a = math.log(Y)
        beyond, der = 0.0, poly
        for _ in range(poly.degree() + 1):
            beyond += der(a)
            der = der.deriv()
        beyond *= math.exp(-a)
        return self.bound_constant() ** 2 * dd**2 * (explicit + beyond)

    def _f_values(self, xs: np.ndarray, d: int) -> tuple[np.ndarray, np.ndarray]:
        xs = np.asarray(xs, dtype=float)
        ms = self.q * d
        B = self._b_matrix(ms)
        P = self._P_matrix(B, ms, xs)
        weight = (self.mu / self.q.astype(float) ** 2)[:, None]
        # terms with qd > x^2 are dropped and charged to the uncertainty
        keep = ms[:, None].astype(float) <= xs[None, :] ** 2
        vals = np.sum(np.where(keep, weight * P**2, 0.0), axis=0)
        unc = np.array([self._tail_bound(float(x), d) for x in xs])
        if not keep.all():
            C = self.bound_constant()
            dk1 = np.array([dk(self.k - 1, int(m)) for m in ms], dtype=float)
            drop = (C * dk1[:, None]) ** 2 * np.log(ms[:, None] * xs[None, :]) ** (2 * self.k - 2)
            drop = drop / self.q.astype(float)[:, None] ** 2
            unc = unc + np.sum(np.where(keep, 0.0, drop), axis=0)
        # floating point allowance
        unc = unc + 16 * _EPS * np.sum(np.abs(weight * P**2), axis=0)
        return vals, unc

    def _diagnose(self, value: float, unc: float, what: str) -> tuple[str, ...]:
        if self.rtol_target is not None and unc > self.rtol_target * abs(value):
            return (f"{what}: uncertainty {unc:.3g} exceeds rtol {self.rtol_target:g}; raise Q",)
        return ()

    def f_k_eval(self, x: float, d: int) -> Estimate:
        if d < 1:
            raise ValueError("d must be >= 1")
        if not x > 1:
            raise ValueError("x must exceed 1")
        v, u = self._f_values(np.array([float(x)]), d)
        return Estimate(float(v[0]), float(u[0]), self._diagnose(v[0], u[0], "f_k"))

    def _mprime_values(self, xs: np.ndarray, h: int) -> tuple[np.ndarray, np.ndarray]:
        vals = np.zeros(len(xs))
        unc = np.zeros(len(xs))
        for d in divisors(h):
            v, u = self._f_values(xs, d)
            vals += v / d
            unc += u / d
        return vals, unc

    def m_k_prime(self, x: float, h: int) -> Estimate:
        if h < 1:
            raise ValueError("h must be >= 1")
        if not x > 1:
            raise ValueError("x must exceed 1")
        v, u = self._mprime_values(np.array([float(x)]), h)
        return Estimate(float(v[0]), float(u[0]), self._diagnose(v[0], u[0], "m_k'"))

    def _gl(self, u1: float, u2: float, panels: int, h: int):
        edges = np.linspace(u1, u2, panels + 1)
        half = np.diff(edges) / 2
        mid = (edges[:-1] + edges[1:]) / 2
        us = (mid[:, None] + half[:, None] * _GL_NODES[None, :]).ravel()
        ws = (half[:, None] * _GL_WEIGHTS[None, :]).ravel()
        ys = np.exp(us)
        v, u = self._mprime_values(ys, h)
        return float(np.sum(ws * ys * v)), float(np.sum(ws * ys * u))

    def m_k_increment(self, x1: float, x2: float, h: int) -> Estimate:
        """Integral of m_k'(y, h) over [x1, x2], y = e^u on log-spaced panels."""
        if not 1 < x1 < x2:
            raise ValueError("need 1 < x1 < x2")
        if h < 1:
            raise ValueError("h must be >= 1")
        u1, u2 = math.log(x1), math.log(x2)
        panels = max(1, math.ceil((u2 - u1) / 0.25))
        coarse, _ = self._gl(u1, u2, panels, h)
        for _ in range(6):
            panels *= 2
            fine, tail = self._gl(u1, u2, panels, h)
            qerr = abs(fine - coarse)
            if qerr <= self.quad_rtol * abs(fine):
                unc = tail + qerr
                return Estimate(fine, unc, self._diagnose(fine, unc, "increment"),
                                {"panels": panels, "quad_err": qerr})
            coarse = fine
        unc = tail + qerr
        return Estimate(fine, unc, (f"increment quadrature reached only {qerr / abs(fine):.2g} relative",),
                        {"panels": panels, "quad_err": qerr})

    def m_prime_log_polynomial(self, h: int) -> np.polynomial.Polynomial:
        """m_k'(e^u, h) as an exact polynomial in u (no qd > x^2 exclusion)."""
        Poly = np.polynomial.Polynomial
        total = Poly([0.0])
        for d in divisors(h):
            ms = self.q * d
            for q, mu, m in zip(self.q, self.mu, ms):
                b = self.b_coefficients(int(m))
                P = Poly([0.0])
                shift = Poly([-math.log(m), 1.0])
                for i in range(self.k):
                    e = self.k - 1 - i
                    P = P + b[i] * shift**e / math.factorial(e)
                total = total + (mu / (float(q) ** 2 * d)) * P**2
        return total

    def m_k_increment_exact(self, x1: float, x2: float, h: int) -> float:
        """Closed-form integral of the log-polynomial: e^u sum_j (-1)^j p^(j)(u)."""
        p = self.m_prime_log_polynomial(h)

        def antideriv(u):
            acc, der, sign = 0.0, p, 1.0
            while der.degree() > 0 or der.coef[0] != 0:
                acc += sign * der(u)
                der = der.deriv()
                sign = -sign
                if der.degree() == 0 and der.coef[0] == 0:
                    break
            return math.exp(u) * acc

        return antideriv(math.log(x2)) - antideriv(math.log(x1))


def p_bound_constant(engine: SingularSeriesEngine, ms, xs) -> float:
    """max |P_k(x,m)| / (d_{k-1}(m) log^{k-1}(m x)) over the grid (0/0 skipped)."""
    k = engine.k
    worst = 0.0
    for m in ms:
        dd = dk(k - 1, m)
        for x in xs:
            p = abs(engine.P(x, m))
            if dd == 0:
                if p > 1e-12:
                    raise ArithmeticError(f"P_{k}(x,{m}) = {p} where the bound forces 0")
                continue
            worst = max(worst, p / (dd * math.log(m * x) ** (k - 1)))
    return worst


def p_bound_check(engine: SingularSeriesEngine, q_max: int = 1000, x_exp_max: int = 8) -> dict:
    """Fitted bound constant on the half grid and the full grid."""
    xs = [10.0**e for e in range(3, x_exp_max + 1)]
    coarse = p_bound_constant(engine, range(1, q_max // 2 + 1), xs[: max(1, len(xs) // 2)])
    fine = p_bound_constant(engine, range(1, q_max + 1), xs)
    return {"k": engine.k, "C_coarse": coarse, "C_fine": fine,
            "stable": fine <= 1.5 * max(coarse, 1e-300) or (coarse == fine)}


def f_bound_check(engine: SingularSeriesEngine, xs, ds) -> dict:
    """Smallest C with f_k(x,d) <= C d_{k-1}(d)^2 log^{2k-2} x over the grid (d <= x)."""
    k = engine.k
    worst = 0.0
    rows = []
    for x in xs:
        for d in ds:
            if d > x:
                continue
            f = engine.f_k_eval(x, d).value
            dd = dk(k - 1, d)
            if dd == 0:
                if abs(f) > 1e-12:
                    raise ArithmeticError(f"f_{k}({x},{d}) = {f} where the bound forces 0")
                continue
            c = f / (dd**2 * math.log(x) ** (2 * k - 2))
            rows.append((x, d, c))
            worst = max(worst, c)
    return {"k": k, "C": worst, "rows": rows}


# -- a_k ---------------------------------------------------------------------

@lru_cache(maxsize=None)
def log_factor_series(k: int, form: str, M: int = 40) -> tuple[Fraction, ...]:
    """Exact Taylor coefficients c_0..c_M of log(local factor) in x = 1/p."""
    if form == "eq10":
        E = k * k
        s = [Fraction(math.comb(k + r - 1, r) ** 2) for r in range(M + 1)]
    elif form == "eq51":
        E = (k - 1) ** 2
        s = [Fraction(math.comb(k - 1, r) ** 2) if r < k else Fraction(0) for r in range(M + 1)]
    else:
        raise ValueError(f"unknown form {form!r}")
    logS = [Fraction(0)] * (M + 1)
    for m in range(1, M + 1):
        acc = m * s[m] - sum(j * logS[j] * s[m - j] for j in range(1, m))
        logS[m] = acc / m
    return tuple(logS[m] - (Fraction(E, m) if m else 0) for m in range(M + 1))


@lru_cache(maxsize=8)
def _prime_inverse_square_sum(P: int) -> float:
    """sum_{p > P} p^{-2} = primezeta(2) - sum_{p <= P} p^{-2}."""
    mp = mpmath.MPContext()
    mp.dps = 30
    pz = mp.primezeta(2)
    ps = primes_up_to(P)
    return float(pz - mp.fsum(mp.mpf(1) / (int(p) * int(p)) for p in ps))


def _body_logs(k: int, P: int, form: str) -> tuple[np.ndarray, np.ndarray]:
    """Per-prime log local factors and the magnitude of their two parts.

    The parts E log(1-1/p) and log S nearly cancel, so rounding scales with
    their size, not with the size of the sum.
    """
    x = 1.0 / primes_up_to(P).astype(float)
    if form == "eq51":
        S1 = np.zeros_like(x)
        for r in range(k - 1, 0, -1):
            S1 = (S1 + math.comb(k - 1, r) ** 2) * x
        a, b = (k - 1) ** 2 * np.log1p(-x), np.log1p(S1)
        return a + b, np.abs(a) + np.abs(b)
    if form == "eq10":
        S1 = np.zeros_like(x)
        active = np.ones_like(x, dtype=bool)
        r = 1
        while active.any():
            xa = x[active]
            t = math.comb(k + r - 1, r) ** 2 * xa**r
            S1[active] += t
            ratio = ((k + r) / (r + 1)) ** 2 * xa
            done = (ratio < 1) & (t * ratio / (1 - ratio) < 1e-18 * (1 + S1[active]))
            idx = np.nonzero(active)[0]
            active[idx[done]] = False
            r += 1
            if r > 100_000:
                raise RuntimeError("eq10 local sums failed to converge")
        if not np.all(np.isfinite(S1)):
            raise OverflowError(f"eq10 local sums overflow at k={k}")
        a, b = k * k * np.log1p(-x), np.log1p(S1)
        return a + b, np.abs(a) + np.abs(b)
    raise ValueError(f"unknown form {form!r}")


def a_k_eval(k: int, P: int = 10**6, form: str = "eq10") -> Estimate:
    """Euler product for a_k over p <= P with an explicit tail.

    The tail sum_{p>P} log(local factor) is c_2 sum_{p>P} p^{-2} (exact
    prime zeta) plus a bound for m >= 3 from sum_{p>P} p^{-m} <= P^{1-m}/(m-1).
    ``extra["log_value"]`` keeps log a_k for k where a_k underflows.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if P < 100:
        raise ValueError("prime cutoff must be >= 100")
    logs, parts = _body_logs(k, P, form)
    body = math.fsum(logs)
    rounding = 8 * _EPS * math.fsum(parts)
    c = log_factor_series(k, form)
    if c[1] != 0:
        raise ArithmeticError("log local factor has a 1/p term")
    tail = float(c[2]) * _prime_inverse_square_sum(P)
    M = len(c) - 1
    bound = math.fsum(abs(float(c[m])) * P ** (1.0 - m) / (m - 1) for m in range(3, M + 1))
    if c[M - 1] != 0:
        rho = abs(float(c[M]) / float(c[M - 1])) / P
        if rho >= 0.5:
            raise ArithmeticError(f"prime cutoff {P} inside the radius of the log series at k={k}")
        bound += abs(float(c[M])) * P ** (1.0 - M) * rho / (1 - rho)
    if k == 1 and form == "eq51":
        rounding = 0.0  # every logged term is exactly zero
    delta = bound + rounding
    log_value = body + tail
    value = math.exp(log_value)
    return Estimate(value, value * math.expm1(delta),
                    extra={"log_value": log_value, "log_uncertainty": delta,
                           "tail": tail, "tail_bound": bound, "primes": len(logs),
                           "prime_cutoff": P, "form": form})


def hstar_identity_report(k: int, primes) -> dict:
    """Per-prime H* local factor against the eq10 a_k local factor."""
    if not 1 <= k <= 4:
        raise ValueError("hstar_identity_report supports 1 <= k <= 4")
    rows = []
    log_ratio = 0.0
    for p in primes:
        p = int(p)
        h = ls.hstar_local_factor(k, p)
        a = ls.ak_local_factor(k, p, "eq10")
        rows.append({"p": p, "hstar": float(h), "ak": float(a), "deviation": float(abs(h - a))})
        log_ratio += float(ls.MP.log(h / a))
    return {"k": k, "rows": rows,
            "max_deviation": max((r["deviation"] for r in rows), default=0.0),
            "product_ratio": math.exp(log_ratio)}


def proposition_trend(k_max: int = 60, P: int = 10**6, ks=None) -> list[dict]:
    """Rows (k, log a_k, -k^2 log(2 e^gamma log k), ratio) for k >= 2."""
    if k_max > 60:
        raise ValueError("k_max must be <= 60")
    if P < 2 * k_max**2:
        raise ValueError(f"prime cutoff {P} below 2 k_max^2 = {2 * k_max ** 2}")
    ks = ks or range(2, k_max + 1)
    rows = []
    for k in ks:
        est = a_k_eval(k, P, "eq51")
        la = est.extra["log_value"]
        pred = -k * k * math.log(2 * math.exp(float(ls.STIELTJES[0])) * math.log(k))
        rows.append({"k": k, "log_a_k": la, "prediction": pred, "ratio": la / pred,
                     "a_k_positive": est.value > 0 or la > -math.inf})
    return rows


# -- correlation reports --------------------------------------------------------

def correlation_report(engine: SingularSeriesEngine, xs, hs, table: DivisorTable | None = None,
                       anchor: float = 0.5, cache_dir=None) -> list[PredictionReport]:
    """D_k(x,h) - D_k(x0,h) against the integral of m_k' over [x0, x], x0 = anchor*x."""
    k = engine.k
    xs = [float(x) for x in xs]
    hs = [int(h) for h in hs]
    for x in xs:
        for h in hs:
            if h < 1 or h > math.sqrt(x):
                raise ValueError(f"h={h} outside 1 <= h <= sqrt(x) for x={x:g}")
    need = int(max(xs)) + max(hs)
    if table is None or table.x_max < need:
        table = sieve_dk(k, need, cache_dir)
    fp = fingerprint({**engine.config, "anchor": anchor})
    out = []
    for x in xs:
        x0 = anchor * x
        if x0 < 1e3 and k > 1:
            raise ValueError("anchor point must be >= 1e3")
        for h in hs:
            est = engine.m_k_increment(x0, x, h)
            actual = brute_force_Dk(k, x, h, table) - brute_force_Dk(k, x0, h, table)
            err = abs(est.value - actual)
            out.append(PredictionReport(k, x, h, est.value, est.uncertainty, float(actual), fp,
                                        {"x0": x0, "err_over_sqrt_x": err / math.sqrt(x),
                                         "diagnostics": est.diagnostics}))
    return out
