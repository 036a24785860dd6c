"""Tabulate the weight curves of the three figure families (1/n,1,n), (3/7,beta,2), (3/10,beta,3).

Writes one CSV per curve (columns y, m, abs_err) and prints the negative parts found.

    python scripts/reproduce_figures.py --out figures --grid 2000
"""

import argparse
import time
from pathlib import Path

from leroycm.cli import FIGURES
from leroycm.io import write_curve_csv
from leroycm.mlr import MLRParams
from leroycm.weight import weight_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("figures"))
    ap.add_argument("--grid", type=int, default=2000)
    ap.add_argument("--figures", default="00,1,2", help="comma-separated subset of 00,1,2")
    args = ap.parse_args()

    for fig in args.figures.split(","):
        print(f"figure {fig}")
        for t in FIGURES[fig]:
            t0 = time.perf_counter()
            params = MLRParams.of(*t)
            prof = weight_profile(params, grid=args.grid)
            rows = [(y, m, e) for (y, m), e in zip(prof.grid, prof.abs_err)]
            path = write_curve_csv(args.out / f"fig{fig}", params, rows)
            neg = ", ".join(f"({a:.3f}, {b:.3f})" for a, b in prof.negative_intervals) or "none"
            print(f"  {params.label():>16}  y in [0, {prof.ys[-1]:.3f}]  min m = {prof.ms.min():+.4e}  "
                  f"negative: {neg}  -> {path}  ({time.perf_counter() - t0:.1f} s)")


if __name__ == "__main__":
    main()
