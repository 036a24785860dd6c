"""The Bernstein weight m_{l/k,beta}(n; y) of F^{(n)}_{l/k,beta}(-x).

m(y) = sum_r c_r y^r with c_r = (-1)^r / (r! Gamma(beta - (l/k)(1+r))^n).
The series has infinite radius when l n < k and radius n when l n = k, in
which case m vanishes for y >= n.  Near that radius the series is summed by a
head/tail split whose tail is resummed with Hurwitz zeta functions.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import mpmath
import numpy as np

from .errors import ClassificationError, ConvergenceError, DomainError
from .mlr import Classification, MLRParams
from .specfun import (
    EPS,
    SeriesValue,
    bessel_i,
    bessel_k,
    reciprocal_gamma,
    to_mp,
)


class _Unavailable:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNAVAILABLE"

    def __bool__(self):
        return False


UNAVAILABLE = _Unavailable()


@dataclass(frozen=True)
class WeightConfig:
    tol: float = 1e-12  # relative, measured against max(|m|, abs_floor)
    abs_floor: float = 1e-14
    near_fraction: float = 0.95  # CRITICAL: switch to the radius expansion above this y/R
    max_dps: int = 3000
    term_cap: int = 200_000


DEFAULT_WEIGHT = WeightConfig()


@dataclass(frozen=True)
class WeightCoefficient:
    r: int
    b_r: Fraction
    c_r: float


def radius(params: MLRParams) -> float:
    cls = params.classification()
    if cls is Classification.SUB:
        return math.inf
    if cls is Classification.SUPER:
        return 0.0
    l, k, n = params.l, params.k, params.n
    return (k / l) ** (l * n / k)


def _require_not_super(params: MLRParams):
    if params.classification() is Classification.SUPER:
        raise ClassificationError(
            f"{params.label()}: l*n > k, the weight series has radius of convergence 0")


def b_index(params: MLRParams, r: int) -> Fraction:
    return 1 - params.beta + Fraction(params.l * (1 + r), params.k)


def weight_coeff(params: MLRParams, r: int) -> WeightCoefficient:
    _require_not_super(params)
    if r < 0:
        raise DomainError("coefficient index must be nonnegative")
    series = _series_for(params)
    return WeightCoefficient(r, b_index(params, r), float(series.coeff_mp(r, 30)))


# ---------------------------------------------------------------------------
# per-parameter series machinery


class _NearRadius:
    """m(R - d) for the CRITICAL case (l = 1, k = n, R = n), valid for small d.

    m = head (first N terms) + sum_{r >= N} c_r y^r.  With d_r = c_r n^r =
    s_r G(r), s_r periodic in r with period n, and ln G(r) expanded in 1/r,
    the tail becomes a singular part in L = n log(y/R) plus a Taylor series in
    L whose coefficients are Hurwitz zeta values.
    """

    def __init__(self, params: MLRParams, N: int = 60, J: int = 24, K: int = 60, dps: int = 50):
        n = params.n
        self.n = n
        self.dps = dps
        N = n * -(-N // n)
        self.N = N
        with mpmath.workdps(dps):
            b = to_mp(params.beta)
            c = 1 - b + mpmath.mpf(1) / n
            p = n * c - mpmath.mpf(n + 1) / 2
            lnC = -(n * c - mpmath.mpf(n) / 2) * mpmath.log(n) + mpmath.mpf(n - 1) / 2 * mpmath.log(2 * mpmath.pi)
            C = mpmath.exp(lnC)
            gam = [mpmath.mpf(0)] + [
                (-1) ** (k + 1) * (n ** (k + 1) * mpmath.bernpoly(k + 1, c) - mpmath.bernpoly(k + 1, 1)) / (k * (k + 1))
                for k in range(1, J)
            ]
            e = [mpmath.mpf(1)] + [mpmath.mpf(0)] * (J - 1)
            for j in range(1, J):
                e[j] = mpmath.fsum(k * gam[k] * e[j - k] for k in range(1, j + 1)) / j
            s = [(-1) ** rho * (mpmath.sin(mpmath.pi * (b - mpmath.mpf(1 + rho) / n)) / mpmath.pi) ** n
                 for rho in range(n)]
            ssum = mpmath.fsum(s)
            if any(abs((j - p) - mpmath.nint(j - p)) < mpmath.mpf(10) ** (-dps // 3) for j in range(J)):
                # integer exponents: a tiny shift turns the log terms into a limit
                p = p + mpmath.mpf(10) ** (-dps // 2)
            Q = N // n
            zeta = {}
            for m in range(-K + 1, J):
                for rho in range(n):
                    zeta[m, rho] = mpmath.zeta(m - p, Q + mpmath.mpf(rho) / n)
            npow = [mpmath.mpf(n) ** (p - j) for j in range(J)]
            self.W = [C * mpmath.fsum(s[rho] * mpmath.fsum(e[j] * npow[j] * zeta[j - k, rho] for j in range(J))
                                      for rho in range(n))
                      for k in range(K)]
            self.sing = [C * e[j] * npow[j] * mpmath.gamma(1 - (j - p)) * ssum for j in range(J)]
            self.p = p
            self.head = [(-1) ** r * mpmath.rgamma(b - mpmath.mpf(1 + r) / n) ** n / mpmath.factorial(r)
                         for r in range(N)]
            self.fact = [mpmath.factorial(k) for k in range(K)]

    def __call__(self, d) -> float:
        with mpmath.workdps(self.dps):
            n = self.n
            d = mpmath.mpf(d)
            y = n - d
            L = n * mpmath.log1p(-d / n)
            head = mpmath.polyval(self.head[::-1], y)
            sing = mpmath.fsum(self.sing[j] * (-L) ** (j - self.p - 1) for j in range(len(self.sing)))
            reg = mpmath.fsum(self.W[k] * L ** k / self.fact[k] for k in range(len(self.W)))
            return float(head + sing + reg)


class _WeightSeries:
    """Cached coefficients and evaluators for one parameter triple."""

    def __init__(self, params: MLRParams):
        _require_not_super(params)
        self.params = params
        self.cls = params.classification()
        self.R = radius(params)
        self._lock = threading.Lock()
        self._mp: dict[int, list] = {}
        self._float = np.zeros(0)
        self._logenv = np.zeros(0)
        self._positive_b = np.zeros(0, dtype=bool)
        self._near = None

    # coefficients ---------------------------------------------------------

    def _arg(self, r: int) -> Fraction:
        p = self.params
        return p.beta - Fraction(p.l * (1 + r), p.k)

    def coeff_mp(self, r: int, dps: int):
        bucket = max(30, 20 * -(-dps // 20))
        with self._lock:
            lst = self._mp.setdefault(bucket, [])
            if len(lst) <= r:
                with mpmath.workdps(bucket):
                    n = self.params.n
                    for i in range(len(lst), r + 1):
                        lst.append((-1) ** i * mpmath.rgamma(to_mp(self._arg(i))) ** n / mpmath.factorial(i))
            return lst[r]

    def coeffs_mp(self, count: int, dps: int) -> list:
        self.coeff_mp(count - 1, dps)
        bucket = max(30, 20 * -(-dps // 20))
        return self._mp[bucket][:count]

    def _grow(self, count: int):
        with self._lock:
            have = len(self._float)
            if have >= count:
                return
        count = max(count, 2 * have, 64)
        vals = np.empty(count)
        env = np.empty(count)
        n = self.params.n
        for r in range(count):
            x = float(self._arg(r))
            b = 1.0 - x
            if b > 0:
                # |c_r| <= Gamma(b_r)^n / (pi^n r!) from the reflection formula
                env[r] = n * math.lgamma(b) - n * math.log(math.pi) - math.lgamma(r + 1)
            else:
                rg = reciprocal_gamma(x)
                env[r] = -math.inf if rg == 0 else n * math.log(abs(rg)) - math.lgamma(r + 1)
        with mpmath.workdps(30):
            for r in range(count):
                v = self.coeff_mp(r, 30)
                vals[r] = float(v)
        positive = np.array([1.0 - float(self._arg(r)) > 0 for r in range(count)])
        with self._lock:
            if len(self._float) < count:
                self._float = vals
                self._logenv = env
                self._positive_b = positive

    def coeffs_float(self, count: int) -> np.ndarray:
        self._grow(count)
        return self._float[:count]

    def log_envelope(self, count: int) -> np.ndarray:
        self._grow(count)
        return self._logenv[:count]

    # truncation -----------------------------------------------------------

    def terms_needed(self, y: float, log_eps: float, cap: int) -> tuple[int, float]:
        """Number of terms and a bound on the omitted tail for sum c_r y^r.

        Stops once the envelope is decreasing geometrically and its tail sum
        falls below exp(log_eps).
        """
        if y == 0:
            return 1, 0.0
        ly = math.log(y)
        count = 64
        while True:
            env = self.log_envelope(count) + ly * np.arange(count)
            lr = env[1:] - env[:-1]
            with np.errstate(invalid="ignore", divide="ignore"):
                tail = env[:-1] - np.log1p(-np.exp(np.minimum(lr, 0.0)))
                ok = self._positive_b[:count - 1] & (lr < -1e-3) & (tail < log_eps)
            ok[0] = False
            hits = np.flatnonzero(ok)
            if hits.size:
                r = int(hits[0])
                return r + 1, math.exp(tail[r])
            if count >= cap:
                raise ConvergenceError(f"weight series needs more than {cap} terms at y = {y:g}")
            count *= 2

    def envelope_peak(self, y: float, cap: int) -> tuple[float, int]:
        """(log10 of the largest term bound, its index), from lgamma alone.

        Lets hopeless evaluations fail before any coefficient is built.
        """
        p = self.params
        a, b0, n = p.l / p.k, float(p.beta), p.n
        ly = math.log(y)
        lpi = n * math.log(math.pi)
        best, arg = -math.inf, 0
        for r in range(cap):
            b = 1.0 - b0 + a * (1 + r)
            if b <= 0:
                continue
            e = n * math.lgamma(b) - lpi - math.lgamma(r + 1) + r * ly
            if e > best:
                best, arg = e, r
            elif e < best - 60 and r > 2 * arg + 10:
                return best / math.log(10), arg
        return best / math.log(10), cap

    # evaluation -----------------------------------------------------------

    def eval_double(self, y: float, count: int):
        c = self.coeffs_float(count)
        with np.errstate(over="ignore", invalid="ignore"):
            pw = np.power(y, np.arange(count, dtype=float))
            terms = c * pw
        if not np.all(np.isfinite(terms)):
            return None
        value = math.fsum(terms)
        abs_sum = math.fsum(np.abs(terms))
        return value, abs_sum

    def eval_mp(self, y: float, count: int, dps: int):
        coeffs = self.coeffs_mp(count, dps)
        with mpmath.workdps(dps):
            ym = mpmath.mpf(y)
            value = mpmath.polyval(coeffs[::-1], ym)
            abs_sum = mpmath.polyval([abs(c) for c in coeffs[::-1]], ym)
            return value, abs_sum

    def near(self):
        with self._lock:
            if self._near is None:
                self._near = _NearRadius(self.params)
            return self._near


@lru_cache(maxsize=128)
def _series_for(params: MLRParams) -> _WeightSeries:
    return _WeightSeries(params)


def weight_near_radius(params: MLRParams, d: float) -> float:
    """m(R - d) for CRITICAL params and 0 < d <= 0.05 R, accurate to ~1e-25 relative."""
    if params.classification() is not Classification.CRITICAL:
        raise ClassificationError("the radius expansion applies to l*n = k only")
    if d <= 0:
        return 0.0
    return _series_for(params).near()(d)


def weight_eval(params: MLRParams, y: float, tol: float | None = None,
                cfg: WeightConfig = DEFAULT_WEIGHT) -> SeriesValue:
    """m(y) with an error estimate.

    Double precision first; when the term magnitudes dwarf the sum the
    series is redone in extended precision with enough digits.
    """
    _require_not_super(params)
    tol = cfg.tol if tol is None else tol
    y = float(y)
    if y < 0 or not math.isfinite(y):
        raise DomainError(f"weight needs finite y >= 0, got {y}")
    S = _series_for(params)
    if S.cls is Classification.CRITICAL:
        if y >= S.R:
            return SeriesValue(0.0, 0.0, 0, True)
        if y > cfg.near_fraction * S.R:
            v = S.near()(S.R - y)
            return SeriesValue(v, 1e-20 * max(abs(v), 1.0), S.near().N, True, extended=True)
    if y == 0.0:
        v = float(S.coeff_mp(0, 30))
        return SeriesValue(v, 0.0, 1, True)
    log_eps = math.log(tol * cfg.abs_floor) - 2.0
    peak, where = S.envelope_peak(y, cfg.term_cap)
    if where >= cfg.term_cap or peak - math.log10(tol * cfg.abs_floor) + 10 > cfg.max_dps:
        raise ConvergenceError(
            f"weight series at y = {y:g} for {params.label()} is out of reach: terms up to 1e{peak:.0f} "
            f"around r = {where} (limits: {cfg.max_dps} digits, {cfg.term_cap} terms)")
    count, tail = S.terms_needed(y, log_eps, cfg.term_cap)
    out = S.eval_double(y, count)
    if out is not None:
        value, abs_sum = out
        err = tail + 4 * EPS * abs_sum
        scale = max(abs(value), cfg.abs_floor)
        if err <= tol * scale:
            return SeriesValue(value, err, count, True, abs_sum / max(abs(value), 1e-300), abs_sum=abs_sum)
        log_abs = math.log10(abs_sum)
    else:
        log_abs = float(np.max(S.log_envelope(count) + math.log(y) * np.arange(count))) / math.log(10) + 3
    dps = int(log_abs - math.log10(tol * cfg.abs_floor)) + 10
    for _ in range(5):
        if dps > cfg.max_dps:
            break
        value, abs_sum = S.eval_mp(y, count, dps)
        fv = float(value)
        err = tail + float(abs_sum * mpmath.mpf(10) ** (-dps + 3))
        if err <= tol * max(abs(fv), cfg.abs_floor):
            return SeriesValue(fv, err, count, True, float(abs_sum) / max(abs(fv), 1e-300), True, abs_sum)
        dps += 20
    raise ConvergenceError(f"weight series at y = {y:g} for {params.label()} needs more than "
                           f"{cfg.max_dps} digits")


def weight_value(params: MLRParams, y: float, tol: float | None = None,
                 cfg: WeightConfig = DEFAULT_WEIGHT) -> float:
    return weight_eval(params, y, tol, cfg).value


def weight_grid(params: MLRParams, ys: Sequence[float], tol: float | None = None,
                cfg: WeightConfig = DEFAULT_WEIGHT) -> np.ndarray:
    return np.array([weight_eval(params, y, tol, cfg).value for y in ys])


# ---------------------------------------------------------------------------
# structure: atom, tail, bounds


def atom_beta(n: int) -> Fraction:
    return Fraction(n + 1, 2 * n)


def weight_atom(params: MLRParams) -> float:
    """Mass of the point mass at y = R (nonzero only for l n = k, beta = (n+1)/(2n)).

    At that beta the density's d^{-1} singularity has zero coefficient and the
    missing mass sits at the radius: (2 pi)^{(1-n)/2} sqrt(n).
    """
    if params.classification() is not Classification.CRITICAL:
        return 0.0
    n = params.n
    if params.beta != atom_beta(n):
        return 0.0
    return (2 * math.pi) ** ((1 - n) / 2) * math.sqrt(n)


def radius_exponent(params: MLRParams) -> Fraction:
    """sigma with m(R - d) ~ d^sigma as d -> 0 (CRITICAL case)."""
    n = params.n
    return n * params.beta - Fraction(n + 1, 2) - 1


def weight_asymptotic_tail(params: MLRParams, y: float) -> float:
    """Large-y decay shape of m for l n < k, with unit prefactor."""
    if params.classification() is not Classification.SUB:
        raise ClassificationError("the large-y form applies to l*n < k only")
    if y <= 0:
        raise DomainError("y must be positive")
    return math.exp(log_weight_asymptotic_tail(params, y))


def log_weight_asymptotic_tail(params: MLRParams, y: float) -> float:
    l, k, n = params.l, params.k, params.n
    b = params.beta_float
    gap = k - n * l
    power = (n * l - n * k * (b - 0.5)) / gap
    core = (l ** (n * l) * y ** k / k ** k) ** (1.0 / gap)
    return power * math.log(y) - gap * core


def tail_cutoff(params: MLRParams, threshold: float = 1e-12, cap: float = 50.0) -> float:
    """First y past which the unit-prefactor tail stays below ``threshold`` (capped)."""
    if params.classification() is not Classification.SUB:
        return radius(params)
    lt = math.log(threshold)
    y = 0.25
    # step out until the log-tail is below threshold and decreasing
    while y < cap:
        if log_weight_asymptotic_tail(params, y) < lt and \
                log_weight_asymptotic_tail(params, y * 1.01) < log_weight_asymptotic_tail(params, y):
            break
        y *= 1.05
    return min(y, cap)


def exponential_bound_check(params: MLRParams, y_max: float, grid: int = 400) -> bool:
    """Check |m(y)| <= e^y / Gamma(beta - l/k)^n on a uniform grid over [0, y_max]."""
    if params.beta <= params.alpha.as_fraction():
        raise DomainError("the bound needs beta > l/k")
    g0 = reciprocal_gamma(float(params.beta - params.alpha.as_fraction())) ** params.n
    R = radius(params)
    ok = True
    for y in np.linspace(0.0, y_max, grid):
        if y >= R:
            continue
        m = weight_eval(params, float(y), 1e-10).value
        if abs(m) > math.exp(y) * g0 * (1 + 1e-12):
            ok = False
    return ok


# ---------------------------------------------------------------------------
# closed forms


def _key(params: MLRParams):
    return (params.l, params.k, params.beta, params.n)


def weight_oracle(params: MLRParams, y: float):
    """Closed-form m for the handful of cases where one is known, else UNAVAILABLE."""
    key = _key(params)
    y = float(y)
    if key == (1, 2, Fraction(1), 2):
        return 2.0 / (math.pi * math.sqrt(4.0 - y * y)) if y < 2 else 0.0
    if key == (1, 2, Fraction(1, 2), 2):
        return -2.0 * y / (math.pi * (4.0 - y * y) ** 1.5) if y < 2 else 0.0
    if key == (1, 3, Fraction(1), 2):
        if y == 0:
            return reciprocal_gamma(2.0 / 3.0) ** 2
        z = y ** 3 / 54.0
        return math.sqrt(y) / (2.0 * math.pi ** 1.5) * math.exp(-z) * bessel_k(1.0 / 6.0, z)
    if key == (1, 4, Fraction(1), 2):
        if y == 0:
            return reciprocal_gamma(0.75) ** 2
        z = y * y / 16.0
        return y / (4.0 * math.sqrt(2.0)) * (bessel_i(-0.25, z) - bessel_i(0.25, z)) ** 2
    return UNAVAILABLE


# ---------------------------------------------------------------------------
# profiles and negative regions


@dataclass(frozen=True)
class WeightProfile:
    params: MLRParams
    grid: tuple  # ((y, m), ...)
    radius: float
    negative_intervals: tuple  # ((y_lo, y_hi), ...)
    tol: float
    abs_err: tuple = field(default=())

    def __post_init__(self):
        ys = [p[0] for p in self.grid]
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise ValueError("profile grid must be strictly increasing")
        if any(y >= self.radius for y in ys):
            raise ValueError("profile grid must stay below the radius")

    @property
    def ys(self) -> np.ndarray:
        return np.array([p[0] for p in self.grid])

    @property
    def ms(self) -> np.ndarray:
        return np.array([p[1] for p in self.grid])


def _bisect_sign(params: MLRParams, lo: float, hi: float, width: float, tol: float) -> float:
    """Refine a sign change of m in [lo, hi] (signs differ at the ends) to the given width."""
    flo = weight_eval(params, lo, tol).value < 0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if (weight_eval(params, mid, tol).value < 0) == flo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_negative_intervals(params: MLRParams, ys: np.ndarray, ms: np.ndarray, neg_tol: float,
                            width: float = 1e-3, tol: float = 1e-12):
    """Group grid points with m < -neg_tol into runs, then bisect their edges."""
    neg = ms < -neg_tol
    intervals = []
    i = 0
    N = len(ys)
    while i < N:
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < N and ms[j + 1] < 0:
            j += 1
        lo = ys[0] if i == 0 else _bisect_sign(params, ys[i - 1], ys[i], width, tol)
        hi = ys[-1] if j == N - 1 else _bisect_sign(params, ys[j], ys[j + 1], width, tol)
        intervals.append((float(lo), float(hi)))
        i = j + 1
    return intervals


def weight_profile(params: MLRParams, y_max: float | None = None, grid: int = 2000,
                   tol: float = 1e-12, neg_tol: float = 1e-10, y_min: float = 0.0) -> WeightProfile:
    _require_not_super(params)
    if grid < 2:
        raise DomainError("grid needs at least 2 points")
    R = radius(params)
    if params.classification() is Classification.CRITICAL and (y_max is None or y_max >= R) and y_min == 0:
        # [0, R) in steps of R/grid: never samples the radius itself
        ys = np.arange(grid) * R / grid
    else:
        if y_max is None:
            y_max = tail_cutoff(params)
        if params.classification() is Classification.CRITICAL:
            y_max = min(y_max, R * (1 - 1e-6))
        ys = np.linspace(y_min, y_max, grid)
    evs = [weight_eval(params, float(y), tol) for y in ys]
    ms = np.array([e.value for e in evs])
    errs = tuple(float(e.abs_error_estimate) for e in evs)
    intervals = find_negative_intervals(params, ys, ms, neg_tol, tol=tol)
    return WeightProfile(params, tuple((float(y), float(m)) for y, m in zip(ys, ms)), R,
                         tuple(intervals), tol, errs)
