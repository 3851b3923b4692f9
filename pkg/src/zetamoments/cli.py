"""Command-line entry point: ``zetamoments <subcommand> [options]``.

Exit codes: 0 ok, 1 a verification criterion failed, 2 invalid input,
3 the run finished but carries budget or tolerance diagnostics.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import exactpoly as ep
from .arith import CACHE_ENV, primes_up_to
from .report import PredictionReport, dumps_csv, dumps_json, envelope

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_DIAG = 0, 1, 2, 3


class ValidationError(ValueError):
    pass


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


# -- subcommands: each returns (config, rows, diagnostics) --------------------

def cmd_constants(a):
    from .singular import a_k_eval
    _require(a.k >= 1, "k must be >= 1")
    _require(a.P >= 100, "prime cutoff must be >= 100")
    forms = ("eq10", "eq51") if a.form == "both" else (a.form,)
    rows = []
    for form in forms:
        est = a_k_eval(a.k, a.P, form)
        rows.append({"k": a.k, "form": form, "value": est.value, "uncertainty": est.uncertainty,
                     "log_value": est.extra["log_value"], "prime_cutoff": a.P,
                     "tail": est.extra["tail"], "tail_bound": est.extra["tail_bound"]})
    return {"k": a.k, "form": a.form, "P": a.P}, rows, []


def cmd_wpoly(a):
    _require(1 <= a.k <= ep.MAX_W_K, f"k must lie in [1, {ep.MAX_W_K}]")
    w = ep.w_poly(a.k, a.variant)
    rows = [{"power": i, "coefficient": c} for i, c in enumerate(w.coeffs)]
    return {"k": a.k, "variant": a.variant}, rows, []


def cmd_gamma(a):
    _require(1 <= a.k <= 6, "k must lie in [1, 6]")
    rows = [{"n": n, "gamma": ep.gamma_kn(a.k, n),
             "oracle": ep.gamma_kn_oracle(a.k, n) if a.k <= 4 else None}
            for n in range(a.k * a.k)]
    return {"k": a.k}, rows, []


def cmd_correlate(a):
    from .singular import MAX_ENGINE_K, SingularSeriesEngine, correlation_report
    _require(1 <= a.k <= MAX_ENGINE_K, f"correlation supports 1 <= k <= {MAX_ENGINE_K}")
    _require(a.Q >= 1, "Q must be >= 1")
    _require(bool(a.x) and bool(a.h), "need at least one x and one h")
    for x in a.x:
        _require(x * a.anchor >= 1e3, "anchor point x0 = anchor*x must be >= 1e3")
        for h in a.h:
            _require(1 <= h <= math.sqrt(x), f"h={h} must satisfy 1 <= h <= sqrt(x)")
    eng = SingularSeriesEngine(a.k, Q=a.Q, tol=a.tol, rtol_target=a.rtol_target)
    reps = correlation_report(eng, a.x, a.h, anchor=a.anchor)
    diags = [d for r in reps for d in r.extra.get("diagnostics", ())]
    return {**eng.config, "anchor": a.anchor, "x": a.x, "h": a.h}, reps, diags


def cmd_hstar(a):
    from .singular import hstar_identity_report
    _require(1 <= a.k <= 4, "k must lie in [1, 4]")
    rep = hstar_identity_report(a.k, [int(p) for p in primes_up_to(a.pmax)])
    diags = []
    limit = 1e-9 if a.k == 4 else 1e-10
    if rep["max_deviation"] >= limit:
        diags.append(f"max deviation {rep['max_deviation']:.3g} above {limit:g}")
    return {"k": a.k, "pmax": a.pmax}, rep["rows"], diags


def cmd_proposition(a):
    from .singular import proposition_trend
    _require(2 <= a.kmax <= 60, "kmax must lie in [2, 60]")
    _require(a.P >= 2 * a.kmax**2, "prime cutoff must be >= 2 kmax^2")
    rows = proposition_trend(a.kmax, a.P, ks=a.ks)
    return {"kmax": a.kmax, "P": a.P, "ks": a.ks}, rows, []


def cmd_moments(a):
    from . import zetanum as zn
    _require(a.k >= 1, "k must be >= 1")
    _require(0 <= a.T0 <= a.T <= 1e5, "need 0 <= T0 <= T <= 1e5")
    m = zn.moment_integral(a.k, a.T0, a.T, a.method, budget_s=a.budget)
    row = {"k": m.k, "T0": m.T0, "T1": m.T1, "value": m.value, "error": m.error,
           "points": m.points, "T_reached": m.T_reached}
    if a.T0 == 0 and m.T_reached == a.T and a.T > 1:
        g = zn.gk_estimate(a.k, a.T, m)
        row["g"] = g["g"]
        if "refined" in g:
            row["refined"] = g["refined"]
    diags = [d for d in m.diagnostics if "budget" in d]
    return {"k": a.k, "T0": a.T0, "T": a.T, "method": a.method}, [row], diags


def cmd_dpoly(a):
    from . import zetanum as zn
    _require(a.k >= 1 and a.N >= 1 and a.T > 0, "need k >= 1, N >= 1, T > 0")
    r = zn.dpoly_meansq(a.k, a.N, a.T, 2 * a.T, budget_s=a.budget)
    mv = zn.mv_diagonal(a.k, a.N, a.T)
    row = {"k": a.k, "N": a.N, "T0": a.T, "T1": 2 * a.T, "meansq": r["value"], "error": r["error"],
           "mv_diagonal": mv["value"], "o_scale": mv["o_scale"]}
    return {"k": a.k, "N": a.N, "T": a.T}, [row], r["diagnostics"]


def cmd_probe_c2(a):
    from . import zetanum as zn
    from .report import fingerprint
    _require(a.T >= 50, "T must be >= 50")
    _require(0 <= a.eta <= 1, "eta must lie in [0, 1]")
    r = zn.conjecture2_probe(a.T, a.eta, a.variant)
    cfg = {"T": a.T, "eta": a.eta, "variant": a.variant}
    rep = PredictionReport(1, a.T, 0, r["meansq_N"] + r["meansq_M"], abs(r["cross"]), r["moment"],
                           fingerprint(cfg))
    diags = [] if r["cross_fraction"] < 0.1 else [f"cross fraction {r['cross_fraction']:.3g}"]
    return cfg, [rep], diags


def cmd_probe_c4(a):
    from . import zetanum as zn
    _require(a.k in (1, 2), "probe-c4 supports k in {1, 2}")
    _require(0 <= a.eta <= 1, "eta must lie in [0, 1]")
    _require(a.T >= 10, "T must be >= 10")
    rep = zn.conjecture4_probe(a.k, a.eta, a.T, budget_s=a.budget)
    return {"k": a.k, "eta": a.eta, "T": a.T}, [rep], list(rep.extra.get("diagnostics", ()))


def cmd_verify_all(a):
    from . import verify
    results = verify.run("full" if a.full else "quick", only=a.only)
    rows = [{"criterion": r.cid, "name": r.name, "passed": r.passed, "runtime": round(r.runtime, 3),
             "measured": {k: str(v) for k, v in r.measured.items()}} for r in results]
    for r in results:
        print(r.line, file=sys.stderr)
    failed = [f"criterion {r.cid} failed: {r.name}" for r in results if not r.passed]
    return {"level": "full" if a.full else "quick", "only": a.only}, rows, failed


COMMANDS = {
    "constants": cmd_constants, "wpoly": cmd_wpoly, "gamma": cmd_gamma,
    "correlate": cmd_correlate, "hstar": cmd_hstar, "proposition": cmd_proposition,
    "moments": cmd_moments, "dpoly": cmd_dpoly, "probe-c2": cmd_probe_c2,
    "probe-c4": cmd_probe_c4, "verify-all": cmd_verify_all,
}

CSV_COMMANDS = {"correlate", "probe-c2", "probe-c4"}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zetamoments", description=__doc__.splitlines()[0])
    p.add_argument("--cache-dir", help=f"sieve cache directory (default ${CACHE_ENV})")
    p.add_argument("-o", "--output", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timestamp", help="fixed timestamp for the envelope (reproducible files)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("constants", help="a_k Euler products")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--form", choices=("eq10", "eq51", "both"), default="both")
    s.add_argument("--P", type=int, default=10**6, help="prime cutoff")

    s = sub.add_parser("wpoly", help="exact w_k(eta)")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--variant", choices=ep.W_VARIANTS, default="statement")

    s = sub.add_parser("gamma", help="gamma_k(n) with oracle")
    s.add_argument("--k", type=int, required=True)

    s = sub.add_parser("correlate", help="D_k(x,h) increments against the singular series")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--x", type=_floats, required=True)
    s.add_argument("--h", type=_ints, required=True)
    s.add_argument("--Q", type=int, default=3000)
    s.add_argument("--tol", type=float, default=1e-30)
    s.add_argument("--anchor", type=float, default=0.5, help="x0 = anchor * x")
    s.add_argument("--rtol-target", type=float, default=None)

    s = sub.add_parser("hstar", help="per-prime H* identity")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--pmax", type=int, default=100)

    s = sub.add_parser("proposition", help="log a_k trend")
    s.add_argument("--kmax", type=int, default=40)
    s.add_argument("--P", type=int, default=10**6)
    s.add_argument("--ks", type=_ints, default=None)

    s = sub.add_parser("moments", help="moment integral of |zeta|^{2k}")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--T0", type=float, default=0.0)
    s.add_argument("--method", choices=("auto", "em", "rs"), default="auto")
    s.add_argument("--budget", type=float, default=None, help="seconds")

    s = sub.add_parser("dpoly", help="Dirichlet polynomial mean square on [T, 2T]")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--N", type=int, required=True)
    s.add_argument("--T", type=float, required=True)
    s.add_argument("--budget", type=float, default=None)

    s = sub.add_parser("probe-c2", help="k=1 split into two Dirichlet polynomials")
    s.add_argument("--T", type=float, default=2000.0)
    s.add_argument("--eta", type=float, default=0.0)
    s.add_argument("--variant", choices=("split", "m0"), default="split")

    s = sub.add_parser("probe-c4", help="long Dirichlet polynomial against w_k(eta)")
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--eta", type=float, default=0.5)
    s.add_argument("--T", type=float, default=500.0)
    s.add_argument("--budget", type=float, default=600.0)

    s = sub.add_parser("verify-all", help="run the acceptance checks")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--quick", action="store_true", help="exact identities only (default)")
    g.add_argument("--full", action="store_true")
    s.add_argument("--only", type=_ints, default=None, help="comma-separated criterion ids")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_INVALID
    if args.cache_dir:
        os.environ[CACHE_ENV] = args.cache_dir
    try:
        config, rows, diags = COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.format == "csv":
        if args.command not in CSV_COMMANDS:
            print(f"error: {args.command} has no CSV form", file=sys.stderr)
            return EXIT_INVALID
        text = dumps_csv(rows)
    else:
        text = dumps_json(envelope(args.command, config, rows, diags, timestamp=args.timestamp))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "verify-all":
        return EXIT_FAIL if diags else EXIT_OK
    return EXIT_DIAG if diags else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
