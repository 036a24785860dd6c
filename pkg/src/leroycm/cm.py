"""Complete-monotonicity tooling: sufficient bound, weight sign scans, the boundary M_n(alpha)."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np

from .errors import (BracketError, ClassificationError, ConvergenceError, DomainError,
                     InconclusiveScanError)
from .mlr import Classification, MLRParams, mlr_series
from .specfun import RationalOrder, log_gamma_abs, param_sequence, to_mp
from .weight import (
    WeightConfig,
    find_negative_intervals,
    radius,
    tail_cutoff,
    weight_eval,
)

SCAN_TOL = 1e-10
# sign decisions need absolute accuracy well under SCAN_TOL, not full relative accuracy
SCAN_WEIGHT = WeightConfig(tol=1e-6, abs_floor=1e-8)


# ---------------------------------------------------------------------------
# the supermajorization bound


def supermajorization_holds(beta, n: int) -> bool:
    """(beta, ..., beta) weakly supermajorized by Delta(n, 1): all n partial-sum inequalities."""
    if n < 1:
        raise DomainError("n must be positive")
    beta = Fraction(beta)
    a = param_sequence(n, Fraction(1))
    return all(sum(a[:N]) <= N * beta for N in range(1, n + 1))


def supermajorization_threshold(n: int) -> Fraction:
    """Smallest beta passing every partial-sum inequality, found from the inequalities themselves."""
    a = param_sequence(n, Fraction(1))
    return max(sum(a[:N]) / N for N in range(1, n + 1))


def supermajorization_bound(n: int) -> Fraction:
    """(n+1)/(2n): m_{1/n,beta}(n; y) >= 0 for beta at or above it."""
    if n < 1:
        raise DomainError("n must be positive")
    return Fraction(n + 1, 2 * n)


# ---------------------------------------------------------------------------
# sign scans


class Verdict(enum.Enum):
    NONNEGATIVE = "NONNEGATIVE"
    NEGATIVE_FOUND = "NEGATIVE_FOUND"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class SignReport:
    params: MLRParams
    scan_range: tuple
    grid_size: int
    min_value: float
    negative_intervals: tuple
    verdict: Verdict
    failed_points: int = 0
    argmin: float = 0.0

    def as_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "scan_range": list(self.scan_range),
            "grid_size": self.grid_size,
            "min_value": self.min_value,
            "argmin": self.argmin,
            "negative_intervals": [list(iv) for iv in self.negative_intervals],
            "verdict": self.verdict.value,
            "failed_points": self.failed_points,
        }


def default_scan_max(params: MLRParams) -> float:
    """Scan end: the radius (CRITICAL) or where the large-y decay shape drops below 1e-12 (cap 50)."""
    if params.classification() is Classification.CRITICAL:
        return radius(params)
    return tail_cutoff(params, 1e-12, 50.0)


def _resolved(ev) -> float:
    # values inside their own error bar carry no sign information
    return ev.value if abs(ev.value) > ev.abs_error_estimate else 0.0


def _scan_values(params: MLRParams, ys: np.ndarray, stop_at_negative: bool = False,
                 scan_tol: float = SCAN_TOL):
    ms = np.zeros(len(ys))
    failed = 0
    for i, y in enumerate(ys):
        try:
            ms[i] = _resolved(weight_eval(params, float(y), cfg=SCAN_WEIGHT))
        except ConvergenceError:
            ms[i] = np.nan
            failed += 1
            continue
        if stop_at_negative and ms[i] < -scan_tol:
            return ms[: i + 1], failed, True
    return ms, failed, False


def scan_weight_sign(params: MLRParams, y_max: float | None = None, grid: int = 2000,
                     scan_tol: float = SCAN_TOL, width: float = 1e-3) -> SignReport:
    """Evaluate m on a uniform grid over (0, y_max], then bisect sign changes to ``width``."""
    if params.classification() is Classification.SUPER:
        raise ClassificationError(f"{params.label()}: l*n > k, the weight series has radius 0")
    if grid < 2:
        raise DomainError("grid needs at least 2 points")
    R = radius(params)
    cap = default_scan_max(params)
    y_max = cap if y_max is None else min(y_max, cap)
    if params.classification() is Classification.CRITICAL:
        y_max = min(y_max, R * (1 - 1e-9))
    ys = np.linspace(0.0, y_max, grid + 1)[1:]
    ms, failed, _ = _scan_values(params, ys, scan_tol=scan_tol)
    good = ~np.isnan(ms)
    yg, mg = ys[good], ms[good]
    intervals = find_negative_intervals(params, yg, mg, scan_tol, width=width, tol=1e-12)
    if intervals and intervals[0][0] == yg[0]:
        # negative from the first grid point on: the run starts at the origin
        intervals[0] = (0.0, intervals[0][1])
    min_value = float(np.min(mg)) if len(mg) else math.nan
    argmin = float(yg[int(np.argmin(mg))]) if len(mg) else math.nan
    if intervals:
        verdict = Verdict.NEGATIVE_FOUND
    elif failed > 0.01 * grid or (len(mg) and min_value < 0):
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.NONNEGATIVE
    return SignReport(params, (0.0, float(y_max)), grid, min_value, tuple(intervals), verdict, failed, argmin)


def _sign_verdict(params: MLRParams, grid: int, scan_tol: float = SCAN_TOL) -> Verdict:
    """Fast verdict for the bisection: stops at the first clearly negative point.

    Points are visited coarse-to-fine so negativity anywhere shows up early.
    """
    y_max = default_scan_max(params)
    if params.classification() is Classification.CRITICAL:
        y_max *= 1 - 1e-9
    ys = np.linspace(0.0, y_max, grid + 1)
    order = []
    seen = set()
    step = grid
    while step >= 1:
        for i in range(0, grid + 1, step):
            if i not in seen:
                seen.add(i)
                order.append(i)
        step //= 2
    ms, failed, hit = _scan_values(params, ys[order], stop_at_negative=True, scan_tol=scan_tol)
    if hit:
        return Verdict.NEGATIVE_FOUND
    good = ms[~np.isnan(ms)]
    if failed > 0.01 * len(ys) or (len(good) and good.min() < 0):
        return Verdict.INCONCLUSIVE
    return Verdict.NONNEGATIVE


# ---------------------------------------------------------------------------
# the boundary M_n(alpha)


@dataclass(frozen=True)
class BracketCertificate:
    beta_negative: float  # a beta where the scan found m < 0
    beta_nonnegative: float  # a beta where the scan found m >= 0
    verdict_negative: str
    verdict_nonnegative: str

    def valid(self) -> bool:
        return (self.verdict_negative == Verdict.NEGATIVE_FOUND.value
                and self.verdict_nonnegative == Verdict.NONNEGATIVE.value
                and self.beta_negative < self.beta_nonnegative)


@dataclass(frozen=True)
class BoundarySample:
    alpha: RationalOrder
    M: float
    certificate: BracketCertificate
    iterations: int

    def as_dict(self) -> dict:
        return {
            "alpha": str(self.alpha),
            "M": self.M,
            "iterations": self.iterations,
            "certificate": {
                "beta_negative": self.certificate.beta_negative,
                "beta_nonnegative": self.certificate.beta_nonnegative,
                "verdict_negative": self.certificate.verdict_negative,
                "verdict_nonnegative": self.certificate.verdict_nonnegative,
            },
        }


@dataclass(frozen=True)
class CMBoundaryCurve:
    n: int
    samples: tuple
    beta_tol: float
    alpha_range: tuple

    def __post_init__(self):
        for s in self.samples:
            if not 0 < s.alpha.value < 1 / self.n:
                raise ValueError(f"alpha {s.alpha} outside (0, 1/{self.n})")

    def as_dict(self) -> dict:
        return {"n": self.n, "beta_tol": self.beta_tol, "alpha_range": list(self.alpha_range),
                "samples": [s.as_dict() for s in self.samples]}


def _beta_param(alpha: RationalOrder, beta: float, n: int) -> MLRParams:
    # bisection midpoints are binary fractions; keep them exact
    return MLRParams(alpha, Fraction(beta), n)


def cm_bound_search(n: int, alpha, beta_lo: float = 1e-3, beta_hi: float = 2.0,
                    beta_tol: float = 2e-3, grid: int = 400) -> BoundarySample:
    """Bisect on beta for the smallest beta with a nonnegative weight.

    Requires alpha < 1/n strictly, a negative scan at beta_lo and a
    nonnegative scan at beta_hi.  The result carries scans at M -/+ beta_tol.
    """
    alpha = RationalOrder.parse(alpha)
    if not alpha.value * n < 1:
        raise DomainError(f"alpha = {alpha} must be < 1/{n} strictly")
    if not beta_lo < beta_hi:
        raise BracketError("need beta_lo < beta_hi")
    lo_v = _sign_verdict(_beta_param(alpha, beta_lo, n), grid)
    hi_v = _sign_verdict(_beta_param(alpha, beta_hi, n), grid)
    if lo_v is not Verdict.NEGATIVE_FOUND or hi_v is not Verdict.NONNEGATIVE:
        raise BracketError(f"no bracket: beta={beta_lo} gives {lo_v.value}, beta={beta_hi} gives {hi_v.value}")
    lo, hi = beta_lo, beta_hi
    it = 0
    while hi - lo > beta_tol:
        mid = 0.5 * (lo + hi)
        v = _sign_verdict(_beta_param(alpha, mid, n), grid)
        if v is Verdict.INCONCLUSIVE:
            raise InconclusiveScanError(f"scan at beta={mid} for alpha={alpha}, n={n} is inconclusive")
        if v is Verdict.NEGATIVE_FOUND:
            lo = mid
        else:
            hi = mid
        it += 1
    M = 0.5 * (lo + hi)
    b_neg, b_pos = M - beta_tol, M + beta_tol
    cert = BracketCertificate(
        b_neg, b_pos,
        _sign_verdict(_beta_param(alpha, b_neg, n), grid).value if b_neg > 0 else Verdict.INCONCLUSIVE.value,
        _sign_verdict(_beta_param(alpha, b_pos, n), grid).value,
    )
    return BoundarySample(alpha, M, cert, it)


def _search_task(args):
    return cm_bound_search(*args)


def cm_boundary_curve(n: int, alphas: Sequence, beta_tol: float = 2e-3, grid: int = 400,
                      beta_lo: float = 1e-3, beta_hi: float = 2.0, workers: int = 1) -> CMBoundaryCurve:
    """M_n at each alpha; samples are independent, so ``workers > 1`` runs them in processes."""
    tasks = [(n, a, beta_lo, beta_hi, beta_tol, grid) for a in alphas]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as ex:
            samples = tuple(ex.map(_search_task, tasks))
    else:
        samples = tuple(map(_search_task, tasks))
    vals = [s.alpha.value for s in samples]
    return CMBoundaryCurve(n, samples, beta_tol, (min(vals), max(vals)) if vals else (0.0, 0.0))


# ---------------------------------------------------------------------------
# derivative signs of F(-x)


def _derivative_terms_needed(params: MLRParams, x: float, j: int) -> tuple[int, float]:
    """Terms for sum_r r!/(r-j)! x^{r-j} / Gamma(beta + alpha r)^n and log10 of its largest term."""
    a, b, n = params.alpha.value, params.beta_float, params.n
    lx = math.log(x) if x > 0 else -math.inf
    best = -math.inf
    r = j
    while True:
        arg = b + a * r
        lt = (math.lgamma(r + 1) - math.lgamma(r - j + 1) + (r - j) * lx
              - (n * log_gamma_abs(arg) if not (arg <= 0 and arg == int(arg)) else -math.inf))
        best = max(best, lt)
        if r > j + 10 and arg > 2 and lt < best - 80 and lt < -80:
            return r + 1, best / math.log(10)
        r += 1
        if r > 200_000:
            raise ConvergenceError("derivative series too long")


def mlr_derivative(params: MLRParams, x: float, j: int) -> float:
    """(-1)^j d^j/dx^j F^{(n)}(-x), by term-wise differentiation of the defining series."""
    if j < 0:
        raise DomainError("order must be nonnegative")
    if x < 0:
        raise DomainError("x must be nonnegative")
    count, lmax = _derivative_terms_needed(params, x, j)
    dps = int(max(lmax, 0)) + 30
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x)
        total = mpmath.mpf(0)
        for r in range(j, count):
            g = mpmath.rgamma(to_mp(params.beta + Fraction(params.l * r, params.k))) ** params.n
            if g == 0:
                continue
            ff = mpmath.ff(r, j)  # r (r-1) ... (r-j+1)
            total += (-1) ** (r - j) * ff * xm ** (r - j) * g
        return float(total)


def finite_difference_derivative(params: MLRParams, x: float, j: int, h: float = 1e-4) -> float:
    """(-1)^j f^{(j)}(x) for f(x) = F(-x), central differences (orders <= 3)."""
    if not 0 <= j <= 3:
        raise DomainError("finite differences are only offered up to order 3")
    f = lambda t: mlr_series(params, -t, 1e-15).value  # noqa: E731
    if j == 0:
        d = f(x)
    elif j == 1:
        d = (f(x + h) - f(x - h)) / (2 * h)
    elif j == 2:
        d = (f(x + h) - 2 * f(x) + f(x - h)) / h ** 2
    else:
        d = (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) / (2 * h ** 3)
    return (-1) ** j * d


@dataclass(frozen=True)
class DerivativeReport:
    ok: bool
    values: dict = field(default_factory=dict)  # (x, j) -> (-1)^j f^{(j)}(x)
    failures: tuple = ()


def cm_derivative_report(params: MLRParams, x_grid: Sequence[float], max_order: int,
                         floor: float = -1e-10) -> DerivativeReport:
    if max_order > 8:
        raise DomainError("max_order must be <= 8")
    if any(x <= 0 for x in x_grid):
        raise DomainError("x grid must be positive")
    values = {}
    fails = []
    for x in x_grid:
        for j in range(max_order + 1):
            v = mlr_derivative(params, float(x), j)
            values[(float(x), j)] = v
            if v < floor:
                fails.append((float(x), j, v))
    return DerivativeReport(not fails, values, tuple(fails))


def cm_derivative_check(params: MLRParams, x_grid: Sequence[float], max_order: int) -> bool:
    """True iff (-1)^j f^{(j)}(x) >= -1e-10 for all grid x and j <= max_order."""
    return cm_derivative_report(params, x_grid, max_order).ok
