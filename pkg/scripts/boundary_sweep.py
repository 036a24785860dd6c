"""Sweep M_n(alpha), the smallest beta with a nonnegative weight, over alpha in (0, 1/n).

Each sample is a bisection on beta with a bracket certificate.  Samples are
cached by their search settings, so an interrupted sweep resumes where it
stopped.  Output: a JSON record and a CSV (alpha, M, beta_negative,
beta_nonnegative) per n.

    python scripts/boundary_sweep.py --n 1 2 3 --points 12 --out boundary
"""

import argparse
import csv
import time
from fractions import Fraction
from pathlib import Path

from leroycm.cm import cm_bound_search, supermajorization_bound
from leroycm.io import CurveArtifactRecord, ResultCache, atomic_write, fmt, write_record
from leroycm.specfun import RationalOrder


def alpha_grid(n: int, points: int, max_den: int = 30) -> list[RationalOrder]:
    """Rationals spread over (0, 1/n), denser near 1/n where M_n bends towards (n+1)/(2n)."""
    top = Fraction(1, n)
    out = []
    for i in range(1, points + 1):
        u = 1 - (1 - i / (points + 1)) ** 1.5
        a = (top * Fraction(u).limit_denominator(10 ** 6)).limit_denominator(max_den)
        if 0 < a < top and a not in out:
            out.append(a)
    return [RationalOrder(a.numerator, a.denominator) for a in sorted(out)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--beta-tol", type=float, default=2e-3)
    ap.add_argument("--grid", type=int, default=400)
    ap.add_argument("--out", type=Path, default=Path("boundary"))
    ap.add_argument("--cache-dir", type=Path)
    args = ap.parse_args()

    cache = ResultCache(args.cache_dir)
    for n in args.n:
        samples = []
        for a in alpha_grid(n, args.points):
            key = {"kind": "cm bound", "n": n, "alpha": str(a), "beta_tol": args.beta_tol,
                   "beta_lo": 1e-3, "beta_hi": 2.0, "grid": args.grid}
            hit = cache.get(key)
            t0 = time.perf_counter()
            if hit is None:
                s = cm_bound_search(n, a, 1e-3, 2.0, args.beta_tol, args.grid).as_dict()
                cache.put(key, CurveArtifactRecord(generator="cm bound", params={"n": n, "alpha": str(a)},
                                                   columns=("alpha", "M"), rows=((str(a), s["M"]),),
                                                   extra={"sample": s}))
            else:
                s = hit.extra["sample"]
            samples.append(s)
            c = s["certificate"]
            print(f"n={n} alpha={str(a):>6} ({float(a.value):.4f}): M = {s['M']:.5f}  "
                  f"[{c['verdict_negative']} @ {c['beta_negative']:.5f}, "
                  f"{c['verdict_nonnegative']} @ {c['beta_nonnegative']:.5f}]  {time.perf_counter() - t0:.1f} s",
                  flush=True)
        print(f"n={n}: sufficient bound (n+1)/(2n) = {float(supermajorization_bound(n)):.4f}, "
              f"largest M = {max(s['M'] for s in samples):.4f}")
        write_record(args.out / f"boundary_n{n}.json",
                     CurveArtifactRecord(generator="cm bound", params={"n": n}, columns=("alpha", "M"),
                                         rows=tuple((s["alpha"], s["M"]) for s in samples),
                                         extra={"beta_tol": args.beta_tol, "samples": samples}))
        lines = [("alpha", "M", "beta_negative", "beta_nonnegative")]
        for s in samples:
            num, den = map(int, s["alpha"].split("/"))
            c = s["certificate"]
            lines.append((fmt(num / den), fmt(s["M"]), fmt(c["beta_negative"]), fmt(c["beta_nonnegative"])))
        buf = "".join(",".join(r) + "\n" for r in lines)
        atomic_write(args.out / f"boundary_n{n}.csv", buf)


if __name__ == "__main__":
    main()
