"""Command-line front end.

Exit codes: 0 success, 2 bad arguments or preconditions, 3 convergence
failure, 4 a verification residual above tolerance.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .cm import cm_bound_search, cm_derivative_report, scan_weight_sign
from .errors import LeroyError
from .io import (
    CurveArtifactRecord,
    ResultCache,
    curve_filename,
    write_curve_csv,
    write_record,
)
from .mlr import MLRParams, laplace_recursion_check, mlr_hypergeom, mlr_series
from .specfun import RationalOrder, SeriesConfig
from .verify import STANDARD_X, bernstein_check, standard_grid
from .weight import weight_profile

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_RESIDUAL = 0, 2, 3, 4

FIGURES = {
    "00": [("1/2", 1, 2), ("1/3", 1, 3), ("1/4", 1, 4), ("1/5", 1, 5)],
    "1": [("3/7", b, 2) for b in ("1/2", "3/4", "1", "5/4")],
    "2": [("3/10", b, 3) for b in ("1/3", "2/3", "1", "4/3")],
}


class UsageError(LeroyError):
    exit_code = EXIT_USAGE


def _positive_float(s: str) -> float:
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{s}: must be > 0")
    return v


def _grid_size(s: str) -> int:
    v = int(s)
    if v < 2:
        raise argparse.ArgumentTypeError(f"{s}: grid needs at least 2 points")
    return v


def _float_list(s: str) -> list[float]:
    return [float(t) for t in s.split(",") if t.strip()]


def _order_list(s: str) -> list[RationalOrder]:
    try:
        return [RationalOrder.parse(t.strip()) for t in s.split(",") if t.strip()]
    except (ValueError, LeroyError) as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _add_params(p, required=True):
    p.add_argument("--alpha", required=required, help="rational order l/k, e.g. 1/2")
    p.add_argument("--beta", required=required, help="beta > 0, fractions allowed, e.g. 3/4")
    p.add_argument("--n", type=int, required=required, help="exponent n >= 1")


def _params(args) -> MLRParams:
    return MLRParams.of(args.alpha, args.beta, args.n)


def _emit(obj: dict):
    print(json.dumps(obj, sort_keys=True))


# ---------------------------------------------------------------------------
# eval


def cmd_eval(args) -> int:
    params = _params(args)
    cfg = SeriesConfig(precision=args.precision)
    sv = mlr_series(params, -args.x, args.tol, cfg)
    report = {"params": params.as_dict(), "x": args.x, "value": sv.value,
              "abs_error_estimate": float(sv.abs_error_estimate), "terms_used": sv.terms_used,
              "extended": sv.extended}
    status = EXIT_OK
    if args.cross_check:
        hv = mlr_hypergeom(params, -args.x, args.tol, cfg)
        diff = abs(sv.value - hv.value)
        report.update(hypergeometric=hv.value, route_difference=diff, cross_tol=args.cross_tol)
        if diff > args.cross_tol * max(1.0, abs(sv.value)):
            status = EXIT_RESIDUAL
    if args.json:
        _emit(report)
    else:
        print(f"F{params.label()}(-{args.x:g}) = {sv.value:.17g}")
        print(f"abs_err = {float(sv.abs_error_estimate):.3g}  terms = {sv.terms_used}"
              + ("  (extended precision)" if sv.extended else ""))
        if args.cross_check:
            print(f"hypergeometric route = {report['hypergeometric']:.17g}  "
                  f"difference = {report['route_difference']:.3g}")
    return status


# ---------------------------------------------------------------------------
# weight


def cmd_weight(args) -> int:
    if args.figure:
        triples = FIGURES[args.figure]
    else:
        if args.alpha is None or args.beta is None or args.n is None:
            raise UsageError("weight needs --figure or all of --alpha, --beta, --n")
        triples = [(args.alpha, args.beta, args.n)]
    out = Path(args.out)
    for t in triples:
        params = MLRParams.of(*t)
        prof = weight_profile(params, y_max=args.y_max, grid=args.grid, tol=args.tol)
        rows = [(y, m, e) for (y, m), e in zip(prof.grid, prof.abs_err)]
        if args.json:
            rec = CurveArtifactRecord(
                generator="weight", params=params.as_dict(), columns=("y", "m", "abs_err"),
                rows=tuple(rows),
                extra={"radius": prof.radius, "negative_intervals": [list(iv) for iv in prof.negative_intervals]})
            path = write_record(out / curve_filename(params).replace(".csv", ".json"), rec)
        else:
            path = write_curve_csv(out, params, rows)
        neg = ", ".join(f"({a:.3f}, {b:.3f})" for a, b in prof.negative_intervals) or "none"
        print(f"{params.label()}: {len(rows)} rows -> {path}  negative intervals: {neg}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    grid = [_params(args)] if args.alpha is not None else standard_grid()
    xs = args.x if args.x is not None else list(STANDARD_X)
    rows = []
    worst = 0.0
    # the quadrature tolerance is kept in a range it can reach, independent of the pass/fail threshold
    quad_tol = min(max(args.tol * 1e-2, 1e-13), 1e-10)
    for params in grid:
        for x in xs:
            c = bernstein_check(params, x, quad_tol)
            rows.append(("bernstein", params.label(), x, c.residual))
            print(c.summary())
            worst = max(worst, c.residual)
        if params.n >= 2 and not args.no_recursion:
            for s in args.s:
                r = laplace_recursion_check(params, args.lam, s)
                rows.append(("recursion", params.label(), s, r))
                print(f"{params.label()} recursion lambda={args.lam:g} s={s:g}: residual={r:.3g}")
                worst = max(worst, r)
    ok = worst <= args.tol
    print(f"worst residual {worst:.3g} vs tol {args.tol:g}: {'PASS' if ok else 'FAIL'}")
    if args.out:
        rec = CurveArtifactRecord(generator="verify", params={"grid": [p.as_dict() for p in grid]},
                                  columns=("check", "params", "x_or_s", "residual"), rows=tuple(rows),
                                  extra={"tol": args.tol, "pass": ok})
        write_record(args.out, rec)
    return EXIT_OK if ok else EXIT_RESIDUAL


# ---------------------------------------------------------------------------
# cm


def cmd_cm_scan(args) -> int:
    params = _params(args)
    rep = scan_weight_sign(params, args.y_max, args.grid, args.scan_tol)
    ivs = ", ".join(f"({a:.3f}, {b:.3f})" for a, b in rep.negative_intervals) or "none"
    print(f"{params.label()} on (0, {rep.scan_range[1]:.6g}], {rep.grid_size} points: {rep.verdict.value}")
    print(f"min m = {rep.min_value:.6g} at y = {rep.argmin:.6g}; negative intervals: {ivs}")
    if args.out:
        rec = CurveArtifactRecord(generator="cm scan", params=params.as_dict(), columns=("y_lo", "y_hi"),
                                  rows=tuple(rep.negative_intervals), extra=rep.as_dict())
        write_record(args.out, rec)
    return EXIT_OK


def cmd_cm_bound(args) -> int:
    cache = None if args.no_cache else ResultCache(args.cache_dir)
    samples = []
    for a in args.alphas:
        key = {"kind": "cm bound", "n": args.n, "alpha": str(a), "beta_tol": args.beta_tol,
               "beta_lo": args.beta_lo, "beta_hi": args.beta_hi, "grid": args.grid}
        hit = cache.get(key) if cache else None
        if hit is not None:
            sample = hit.extra["sample"]
            origin = "cached"
        else:
            sample = cm_bound_search(args.n, a, args.beta_lo, args.beta_hi, args.beta_tol, args.grid).as_dict()
            origin = "computed"
            if cache:
                cache.put(key, CurveArtifactRecord(generator="cm bound", params={"n": args.n, "alpha": str(a)},
                                                   columns=("alpha", "M"), rows=((str(a), sample["M"]),),
                                                   extra={"sample": sample}))
        c = sample["certificate"]
        print(f"n={args.n} alpha={a}: M = {sample['M']:.6f}  certificate: "
              f"beta={c['beta_negative']:.6f} {c['verdict_negative']}, "
              f"beta={c['beta_nonnegative']:.6f} {c['verdict_nonnegative']}  ({origin})")
        samples.append(sample)
    if args.out:
        rec = CurveArtifactRecord(generator="cm bound", params={"n": args.n},
                                  columns=("alpha", "M"), rows=tuple((s["alpha"], s["M"]) for s in samples),
                                  extra={"beta_tol": args.beta_tol, "samples": samples})
        write_record(args.out, rec)
    return EXIT_OK


def cmd_cm_derivs(args) -> int:
    params = _params(args)
    rep = cm_derivative_report(params, args.x, args.order)
    for (x, j), v in sorted(rep.values.items()):
        print(f"x={x:g} j={j}: (-1)^j f^(j) = {v:.10g}")
    print("sign pattern holds" if rep.ok else f"sign pattern fails at {len(rep.failures)} (x, j) pairs")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="leroycm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"leroycm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate F(-x)")
    _add_params(p)
    p.add_argument("--x", type=float, required=True, help="evaluate at z = -x")
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--precision", choices=("auto", "standard", "extended"), default="auto")
    p.add_argument("--cross-check", action="store_true", help="also sum the hypergeometric route")
    p.add_argument("--cross-tol", type=_positive_float, default=1e-9)
    p.add_argument("--json", action="store_true", help="print a JSON report")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("weight", help="tabulate the weight m(y)")
    _add_params(p, required=False)
    p.add_argument("--figure", choices=sorted(FIGURES), help="preset curve families")
    p.add_argument("--grid", type=_grid_size, default=2000)
    p.add_argument("--y-max", type=_positive_float)
    p.add_argument("--tol", type=_positive_float, default=1e-12)
    p.add_argument("--out", default=".", help="output directory")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--csv", action="store_true", help="one CSV per curve (default)")
    g.add_argument("--json", action="store_true", help="one JSON record per curve")
    p.set_defaults(func=cmd_weight)

    p = sub.add_parser("verify", help="round-trip and recursion residuals")
    _add_params(p, required=False)
    p.add_argument("--x", type=_float_list, help="comma-separated x values")
    p.add_argument("--s", type=_float_list, default=[1.0, 2.0])
    p.add_argument("--lam", type=float, default=-1.0)
    p.add_argument("--tol", type=_positive_float, default=1e-6)
    p.add_argument("--no-recursion", action="store_true")
    p.add_argument("--out", type=Path, help="write a JSON report here")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("cm", help="complete-monotonicity tools")
    cm = p.add_subparsers(dest="cm_command", required=True)
    q = cm.add_parser("scan", help="sign scan of the weight")
    _add_params(q)
    q.add_argument("--y-max", type=_positive_float)
    q.add_argument("--grid", type=_grid_size, default=2000)
    q.add_argument("--scan-tol", type=_positive_float, default=1e-10)
    q.add_argument("--out", type=Path)
    q.set_defaults(func=cmd_cm_scan)

    q = cm.add_parser("bound", help="bisection for M_n(alpha)")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--alphas", type=_order_list, required=True, help="e.g. 1/5,1/4,1/3")
    q.add_argument("--beta-lo", type=_positive_float, default=1e-3)
    q.add_argument("--beta-hi", type=_positive_float, default=2.0)
    q.add_argument("--beta-tol", type=_positive_float, default=2e-3)
    q.add_argument("--grid", type=_grid_size, default=400)
    q.add_argument("--out", type=Path)
    q.add_argument("--cache-dir", type=Path, help="default: $LEROYCM_CACHE_DIR or ~/.cache/leroycm")
    q.add_argument("--no-cache", action="store_true")
    q.set_defaults(func=cmd_cm_bound)

    q = cm.add_parser("derivs", help="signs of (-1)^j f^(j)(x)")
    _add_params(q)
    q.add_argument("--x", type=_float_list, default=[0.5, 1.0, 2.0, 5.0])
    q.add_argument("--order", type=int, default=6)
    q.set_defaults(func=cmd_cm_derivs)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LeroyError as e:
        err, code = e, e.exit_code
    except (ValueError, ZeroDivisionError) as e:
        # malformed numbers in arguments, e.g. --beta 1/0
        err, code = e, EXIT_USAGE
    print(json.dumps({"error": type(err).__name__, "exit_code": code, "message": str(err)}), file=sys.stderr)
    return code

if __name__ == "__main__":
    sys.exit(main())
