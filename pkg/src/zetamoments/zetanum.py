"""zeta on the critical line, moment integrals and Dirichlet polynomial mean squares.

Two evaluators: Euler-Maclaurin (any complex s, cost O(|t|)) and the
Riemann-Siegel formula with four correction terms (cost O(sqrt t)).  All
integrals are composite Gauss-Legendre over panels of equal width; the
quadrature error is estimated by redoing the integral with panels twice as
wide.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import loggamma

from .arith import sieve_dk
from .exactpoly import w_poly
from .report import PredictionReport, fingerprint

RS_SWITCH = 200.0
PANEL_WIDTH = 0.25
GL_ORDER = 8
EULER_GAMMA = 0.57721566490153286061

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_ORDER)
_EM_TERMS = 30


class PrecisionDiagnostic(UserWarning):
    pass


@lru_cache(maxsize=None)
def _em_coefficients() -> np.ndarray:
    # B_{2j}/(2j)! for j = 1.._EM_TERMS
    return np.array([float(mpmath.bernoulli(2 * j) / mpmath.factorial(2 * j))
                     for j in range(1, _EM_TERMS + 1)])


def zeta_em(s, N: int | None = None) -> np.ndarray:
    """Euler-Maclaurin zeta(s), vectorised over complex s.

    N defaults to |Im s|/pi + 20, which keeps the ratio of successive
    correction terms below about 1/2.
    """
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    out = np.empty_like(s)
    if N is None:
        N = int(np.max(np.abs(s.imag)) / math.pi) + 20 if s.size else 20
    n = np.arange(1, N, dtype=float)
    logn = np.log(n)
    B = _em_coefficients()
    step = max(1, 2_000_000 // max(N, 1))
    for lo in range(0, s.size, step):
        ss = s.ravel()[lo : lo + step]
        head = np.exp(-np.outer(ss, logn)).sum(axis=1)
        NN = float(N)
        total = head + NN ** (1 - ss) / (ss - 1) + NN ** (-ss) / 2
        rising = ss.copy()
        power = NN ** (-ss - 1)
        for j in range(_EM_TERMS):
            total = total + B[j] * rising * power
            rising = rising * (ss + 2 * j + 1) * (ss + 2 * j + 2)
            power = power / (NN * NN)
        out.ravel()[lo : lo + step] = total
    return out


def theta(t):
    """Riemann-Siegel theta, Im log Gamma(1/4 + it/2) - (t/2) log pi."""
    t = np.asarray(t, dtype=float)
    return loggamma(0.25 + 0.5j * t).imag - 0.5 * t * math.log(math.pi)


def chi_factor(s):
    """chi(s) = pi^{s-1/2} Gamma((1-s)/2) / Gamma(s/2)."""
    s = np.asarray(s, dtype=complex)
    for pole in np.atleast_1d(s):
        for z in (pole / 2, (1 - pole) / 2):
            if abs(z.imag) < 1e-12 and z.real <= 0 and abs(z.real - round(z.real)) < 1e-9:
                raise ValueError(f"chi(s) at a Gamma pole: s={pole}")
    return np.exp((s - 0.5) * math.log(math.pi) + loggamma((1 - s) / 2) - loggamma(s / 2))


# -- Riemann-Siegel --------------------------------------------------------

@lru_cache(maxsize=None)
def _rs_polynomials(degree: int = 80) -> tuple[np.ndarray, ...]:
    """C_0..C_4 as polynomials in u = p - 1/2 (numpy.polyval order).

    Psi(p) = cos(2 pi (p^2 - p - 1/16)) / cos(2 pi p) becomes
    -cos(2 pi u^2 - 5 pi/8) / cos(2 pi u); the quotient is entire, so its
    formal series converges for every u.
    """
    mp = mpmath.MPContext()
    mp.dps = 80
    pi = mp.pi
    D = degree + 13
    num = [mp.zero] * D
    # cos(a + b) with a = 2 pi u^2, b = -5 pi/8
    cb, sb = mp.cos(-5 * pi / 8), mp.sin(-5 * pi / 8)
    for m in range(0, D // 2 + 1):
        if 2 * m >= D:
            break
        c = (2 * pi) ** m / mp.factorial(m)
        if m % 2 == 0:
            num[2 * m] += (-1) ** (m // 2) * c * cb
        else:
            num[2 * m] -= (-1) ** (m // 2) * c * sb
    den = [mp.zero] * D
    for m in range(0, D // 2 + 1):
        if 2 * m < D:
            den[2 * m] = -((-1) ** m) * (2 * pi) ** (2 * m) / mp.factorial(2 * m)
    psi = [mp.zero] * D
    for i in range(D):
        acc = num[i] - mp.fsum(den[j] * psi[i - j] for j in range(1, i + 1))
        psi[i] = acc / den[0]

    def deriv(c, r):
        out = list(c)
        for _ in range(r):
            out = [out[i] * i for i in range(1, len(out))]
        return out

    def lin(*parts):
        out = [mp.zero] * (degree + 1)
        for coef, r in parts:
            d = deriv(psi, r)
            for i in range(degree + 1):
                out[i] += coef * d[i]
        return out

    C = [
        lin((1, 0)),
        lin((-1 / (96 * pi**2), 3)),
        lin((1 / (64 * pi**2), 2), (1 / (18432 * pi**4), 6)),
        lin((-1 / (64 * pi**2), 1), (-1 / (3840 * pi**4), 5), (-1 / (5308416 * pi**6), 9)),
        lin((1 / (128 * pi**2), 0), (19 / (24576 * pi**4), 4),
            (11 / (5898240 * pi**6), 8), (1 / (2038431744 * pi**8), 12)),
    ]
    return tuple(np.array([float(c) for c in reversed(poly)]) for poly in C)


def rs_remainder_bound(t) -> np.ndarray:
    """Size of the first omitted correction term, 0.017 t^{-11/4} scale."""
    return 0.017 * np.asarray(t, dtype=float) ** -2.75


def z_rs(t, terms: int = 4) -> np.ndarray:
    """Hardy Z(t) by Riemann-Siegel with corrections C_0..C_terms."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 2 * math.pi):
        raise ValueError("Riemann-Siegel needs t >= 2 pi")
    polys = _rs_polynomials()
    out = np.empty_like(t)
    a = np.sqrt(t / (2 * math.pi))
    Nt = np.floor(a).astype(np.int64)
    th = theta(t)
    step = max(1, 4_000_000 // int(Nt.max()))
    for lo in range(0, t.size, step):
        sl = slice(lo, lo + step)
        tt, NN, tht = t[sl], Nt[sl], th[sl]
        n = np.arange(1, int(NN.max()) + 1, dtype=float)
        mask = n[None, :] <= NN[:, None]
        phase = tht[:, None] - tt[:, None] * np.log(n)[None, :]
        main = 2 * np.sum(np.where(mask, np.cos(phase) / np.sqrt(n)[None, :], 0.0), axis=1)
        u = a[sl] - NN - 0.5
        r = np.sqrt(2 * math.pi / tt)
        corr = np.zeros_like(tt)
        for j in range(min(terms, 4), -1, -1):
            corr = corr * r + np.polyval(polys[j], u)
        sign = np.where(NN % 2 == 1, 1.0, -1.0)
        out[sl] = main + sign * np.sqrt(r) * corr
    return out


def z_em(t) -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return (np.exp(1j * theta(t)) * zeta_em(0.5 + 1j * t)).real


def z_function(t, method: str = "auto") -> np.ndarray:
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if method == "em":
        return z_em(t)
    if method == "rs":
        return z_rs(t)
    if method != "auto":
        raise ValueError(f"unknown method {method!r}")
    out = np.empty_like(t)
    low = t < RS_SWITCH
    if low.any():
        out[low] = z_em(t[low])
    if (~low).any():
        out[~low] = z_rs(t[~low])
    return out


def zeta_crit(t, method: str = "auto"):
    """zeta(1/2 + it) as complex numbers (scalar in, scalar out)."""
    scalar = np.isscalar(t)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    if method == "rs" and np.any(t < RS_SWITCH):
        import warnings
        warnings.warn(f"Riemann-Siegel below t={RS_SWITCH:g} misses the 1e-8 target",
                      PrecisionDiagnostic, stacklevel=2)
    if method == "em":
        out = zeta_em(0.5 + 1j * t)
    else:
        out = np.exp(-1j * theta(t)) * z_function(t, method)
        if method == "auto":
            low = t < RS_SWITCH
            out[low] = zeta_em(0.5 + 1j * t[low])
    return complex(out[0]) if scalar else out


# -- quadrature --------------------------------------------------------------

@dataclass(frozen=True)
class PanelGrid:
    """Equal-width Gauss-Legendre panels on [T0, T1] (the last may be short)."""

    T0: float
    T1: float
    width: float = PANEL_WIDTH

    @property
    def starts(self) -> np.ndarray:
        n = max(1, math.ceil((self.T1 - self.T0) / self.width - 1e-12))
        return self.T0 + self.width * np.arange(n)

    def nodes_weights(self) -> tuple[np.ndarray, np.ndarray]:
        a = self.starts
        b = np.minimum(a + self.width, self.T1)
        half = (b - a) / 2
        t = (a + half)[:, None] + half[:, None] * _GL_NODES[None, :]
        w = half[:, None] * _GL_WEIGHTS[None, :]
        return t, w


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    T0: float
    T1: float
    value: float
    error: float
    points: int
    T_reached: float
    diagnostics: tuple[str, ...] = ()


def _integrate_z(k: int, grid: PanelGrid, method: str, deadline: float | None):
    t, w = grid.nodes_weights()
    total = 0.0
    reached = grid.T0
    chunk = 2048
    for lo in range(0, t.shape[0], chunk):
        if deadline is not None and time.monotonic() > deadline:
            return total, reached, False
        tt = t[lo : lo + chunk]
        z = z_function(tt.ravel(), method).reshape(tt.shape)
        total += float(np.sum(w[lo : lo + chunk] * np.abs(z) ** (2 * k)))
        reached = min(grid.T1, grid.starts[min(lo + chunk, len(grid.starts)) - 1] + grid.width)
    return total, reached, True


def moment_integral(k: int, T0: float, T1: float, method: str = "auto",
                    budget_s: float | None = None) -> MomentEstimate:
    """Integral of |zeta(1/2+it)|^{2k} over [T0, T1].

    The error estimate is the change between panel widths 0.25 and 0.5.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if T1 < T0 or T0 < 0:
        raise ValueError("need 0 <= T0 <= T1")
    if T1 == T0:
        return MomentEstimate(k, T0, T1, 0.0, 0.0, 0, T1)
    diags = []
    if k > 2:
        diags.append(f"k={k} is exploratory")
    deadline = time.monotonic() + budget_s if budget_s else None
    fine_grid = PanelGrid(T0, T1, PANEL_WIDTH)
    fine, reached, complete = _integrate_z(k, fine_grid, method, deadline)
    if not complete:
        diags.append(f"budget exhausted at t={reached:g}")
        return MomentEstimate(k, T0, T1, fine, math.inf, 0, reached, tuple(diags))
    coarse, _, _ = _integrate_z(k, PanelGrid(T0, T1, 2 * PANEL_WIDTH), method, None)
    points = fine_grid.starts.size * GL_ORDER
    return MomentEstimate(k, T0, T1, fine, abs(fine - coarse), points, T1, tuple(diags))


def second_moment_main_term(T: float) -> float:
    """T log(T/2pi) + (2 gamma - 1) T."""
    return T * math.log(T / (2 * math.pi)) + (2 * EULER_GAMMA - 1) * T


def gk_estimate(k: int, T: float, moment: MomentEstimate | None = None, a_k: float | None = None) -> dict:
    """g_k(T) = I_k(T) / ((a_k / Gamma(1+k^2)) T log^{k^2} T).

    For k = 1 the ratio to the refined main term T log(T/2pi) + (2gamma-1)T
    is reported as ``refined``; it tends to 1 much faster than the raw ratio.
    """
    if moment is None:
        moment = moment_integral(k, 0.0, T)
    if a_k is None:
        from .singular import a_k_eval
        a_k = a_k_eval(k, 10**6, "eq51").value
    norm = a_k / math.gamma(1 + k * k) * T * math.log(T) ** (k * k)
    out = {"k": k, "T": T, "moment": moment.value, "moment_error": moment.error,
           "g": moment.value / norm, "g_error": moment.error / norm}
    if k == 1:
        out["refined"] = moment.value / second_moment_main_term(T)
    return out


# -- Dirichlet polynomials ----------------------------------------------------------

def _dpoly_values(a: np.ndarray, grid: PanelGrid, block: int = 64) -> np.ndarray:
    """sum_{n<=N} a_n n^{-1/2-it} at every node of ``grid`` (panels x GL_ORDER).

    Nodes within a panel share fixed offsets, so n^{-i t} factors into a
    panel base phase times a fixed offset matrix.  Base phases advance by the
    recurrence B_{j+1} = B_j n^{-i w} inside a block and are recomputed
    exactly at each block start to stop drift.
    """
    N = a.size
    n = np.arange(1, N + 1, dtype=float)
    logn = np.log(n)
    amp = a / np.sqrt(n)
    starts = grid.starts
    offsets = grid.width / 2 * (1 + _GL_NODES)
    E = amp[None, :] * np.exp(-1j * offsets[:, None] * logn[None, :])  # (8, N)
    steps = np.exp(-1j * grid.width * np.arange(block)[:, None] * logn[None, :])  # (block, N)
    out = np.empty((starts.size, GL_ORDER), dtype=complex)
    for lo in range(0, starts.size, block):
        m = min(block, starts.size - lo)
        base = np.exp(-1j * starts[lo] * logn)
        B = steps[:m] * base[None, :]
        out[lo : lo + m] = B @ E.T
    # a short last panel needs its own nodes
    last = starts[-1]
    if last + grid.width > grid.T1 + 1e-12:
        half = (grid.T1 - last) / 2
        tn = last + half * (1 + _GL_NODES)
        out[-1] = np.exp(-1j * np.outer(tn, logn)) @ amp
    return out


def _grid_weights(grid: PanelGrid) -> np.ndarray:
    return grid.nodes_weights()[1]


def dpoly_coefficients(k: int, N: int, cache_dir=None) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be >= 1")
    return sieve_dk(k, N, cache_dir).values[1:].astype(float)


def dpoly_meansq(k: int, N: int, T0: float, T1: float, coeffs: np.ndarray | None = None,
                 budget_s: float | None = None) -> dict:
    """Integral of |sum_{n<=N} d_k(n) n^{-1/2-it}|^2 over [T0, T1]."""
    if T1 < T0:
        raise ValueError("need T0 <= T1")
    a = dpoly_coefficients(k, N) if coeffs is None else np.asarray(coeffs, dtype=float)
    if T1 == T0:
        return {"value": 0.0, "error": 0.0, "diagnostics": []}
    est_cost = a.size * (T1 - T0) / PANEL_WIDTH * GL_ORDER * 1.5
    diags = []
    if budget_s is not None and est_cost / 2e8 > budget_s:
        diags.append(f"estimated cost {est_cost:.3g} exceeds budget")
        return {"value": math.nan, "error": math.inf, "diagnostics": diags}
    vals = []
    for width in (PANEL_WIDTH, 2 * PANEL_WIDTH):
        g = PanelGrid(T0, T1, width)
        v = _dpoly_values(a, g)
        vals.append(float(np.sum(_grid_weights(g) * np.abs(v) ** 2)))
    return {"value": vals[0], "error": abs(vals[0] - vals[1]), "diagnostics": diags}


def dpoly_meansq_exact(coeffs, T0: float, T1: float) -> float:
    """Closed-form double sum; O(N^2), the oracle for small N."""
    a = np.asarray(coeffs, dtype=float)
    n = np.arange(1, a.size + 1, dtype=float)
    amp = a / np.sqrt(n)
    L = np.log(n)[:, None] - np.log(n)[None, :]  # log(m/n)
    with np.errstate(divide="ignore", invalid="ignore"):
        # int (m/n)^{-it} dt over [T0,T1] = (e^{-i L T1} - e^{-i L T0}) / (-i L)
        kern = (np.sin(L * T1) - np.sin(L * T0)) / L
    np.fill_diagonal(kern, T1 - T0)
    return float(amp @ kern @ amp)


def mv_diagonal(k: int, N: int, T: float, cache_dir=None) -> dict:
    """T sum_{n<=N} d_k(n)^2/n; the O(n) term is reported, not added."""
    d = sieve_dk(k, N, cache_dir).values[1:].astype(float)
    n = np.arange(1, N + 1, dtype=float)
    return {"value": T * math.fsum(d**2 / n), "o_scale": math.fsum(d**2), "k": k, "N": N, "T": T}


def conjecture4_probe(k: int, eta: float, T: float, budget_s: float | None = 600) -> PredictionReport:
    """Mean square of the length-T^{1+eta} polynomial on [T, 2T] against w_k(eta)."""
    from .singular import a_k_eval
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    N = int(T ** (1 + eta))
    res = dpoly_meansq(k, N, T, 2 * T, budget_s=budget_s)
    w = float(w_poly(k)(eta)) if k > 1 else 1.0
    a_k = a_k_eval(k, 10**6, "eq51").value
    pred = w * a_k / math.gamma(k * k + 1) * T * math.log(T) ** (k * k)
    fp = fingerprint({"probe": "c4", "k": k, "eta": eta, "T": T, "width": PANEL_WIDTH})
    return PredictionReport(k, T, 0, pred, 0.0, res["value"], fp,
                            {"N": N, "eta": eta, "w": w, "quad_err": res["error"],
                             "ratio": res["value"] / pred, "diagnostics": res["diagnostics"]})


def conjecture2_probe(T: float, eta: float = 0.0, variant: str = "split") -> dict:
    """The three pieces of |D_N + chi D_M|^2 over [T, 2T] for k = 1.

    ``variant="split"``: N = (T/2pi)^{(1+eta)/2}, M = (T/2pi)/N (MN frozen at
    the left endpoint).  ``variant="m0"``: M = 0, N = 4 T/2pi.
    """
    X = T / (2 * math.pi)
    if variant == "split":
        N = max(1, int(X ** ((1 + eta) / 2)))
        M = int(X / N)
        if X / N < 0.5:
            raise ValueError("M = (T/2pi)/N must be >= 1/2")
    elif variant == "m0":
        N, M = int(4 * X), 0
    else:
        raise ValueError(f"unknown variant {variant!r}")
    grid = PanelGrid(T, 2 * T)
    t, w = grid.nodes_weights()
    DN = _dpoly_values(np.ones(N), grid)
    A = float(np.sum(w * np.abs(DN) ** 2))
    B = cross = 0.0
    if M >= 1:
        DM = _dpoly_values(np.ones(M), grid)
        B = float(np.sum(w * np.abs(DM) ** 2))
        # chi(1/2 - it) = e^{2 i theta(t)}
        cross = 2 * float(np.sum(w * (np.exp(2j * theta(t)) * DN * DM).real))
    moment = moment_integral(1, T, 2 * T)
    total = A + B
    return {"T": T, "eta": eta, "variant": variant, "N": N, "M": M,
            "meansq_N": A, "meansq_M": B, "cross": cross,
            "cross_fraction": abs(cross) / total, "moment": moment.value,
            "ratio": total / moment.value, "ratio_with_cross": (total + cross) / moment.value}


def functional_equation_residual(t_max: float = 100.0, samples: int = 64, seed: int = 0) -> float:
    """max |zeta(s) - chi(s) zeta(1-s)| over s = 1/2 + e^{i phi}/8 + i t."""
    rng = np.random.default_rng(seed)
    t = rng.uniform(0, t_max, samples)
    phi = rng.uniform(0, 2 * math.pi, samples)
    s = 0.5 + np.exp(1j * phi) / 8 + 1j * t
    lhs = zeta_em(s)
    rhs = chi_factor(s) * zeta_em(1 - s)
    return float(np.max(np.abs(lhs - rhs)))
