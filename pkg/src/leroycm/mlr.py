"""Le Roy type Mittag-Leffler functions F^{(n)}_{alpha,beta}(z) for rational alpha."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .errors import ConvergenceError, DomainError
from .specfun import (
    DEFAULT_CONFIG,
    EPS,
    RationalOrder,
    SeriesConfig,
    SeriesValue,
    log_gamma_abs,
    param_sequence,
    pfq_raw,
    reciprocal_gamma,
    to_mp,
)


class Classification(enum.Enum):
    SUB = "SUB"  # l n < k: entire weight, infinite radius
    CRITICAL = "CRITICAL"  # l n = k: weight supported on [0, R)
    SUPER = "SUPER"  # l n > k: weight series has radius zero


def exact_beta(beta) -> Fraction:
    """Convert beta to a Fraction.

    Floats that sit within a few ulps of a fraction with a small denominator
    snap to it, so ``1/3`` typed as a float still hits the Gamma poles exactly.
    """
    if isinstance(beta, Fraction):
        return beta
    if isinstance(beta, int):
        return Fraction(beta)
    if isinstance(beta, str):
        return Fraction(beta.strip())
    x = float(beta)
    if not math.isfinite(x):
        raise DomainError("beta must be finite")
    f = Fraction(x).limit_denominator(10_000)
    if abs(float(f) - x) <= 4 * EPS * max(1.0, abs(x)):
        return f
    return Fraction(x)


@dataclass(frozen=True)
class MLRParams:
    alpha: RationalOrder
    beta: Fraction
    n: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", RationalOrder.parse(self.alpha))
        object.__setattr__(self, "beta", exact_beta(self.beta))
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def of(cls, alpha, beta, n) -> "MLRParams":
        return cls(RationalOrder.parse(alpha), exact_beta(beta), n)

    @property
    def l(self) -> int:
        return self.alpha.l

    @property
    def k(self) -> int:
        return self.alpha.k

    @property
    def beta_float(self) -> float:
        return float(self.beta)

    def classification(self) -> Classification:
        ln = self.l * self.n
        if ln < self.k:
            return Classification.SUB
        if ln == self.k:
            return Classification.CRITICAL
        return Classification.SUPER

    def label(self) -> str:
        return f"({self.alpha}, {self.beta}, {self.n})"

    def as_dict(self) -> dict:
        return {"alpha": str(self.alpha), "beta": str(self.beta), "n": self.n}


# ---------------------------------------------------------------------------
# route 1: the defining series


def _series_arg(params: MLRParams, r: int) -> Fraction:
    return params.beta + Fraction(params.l * r, params.k)


def _ratio_bound(params: MLRParams, az: float, r: int) -> float:
    # |t_{r+1} / t_r| ~ |z| / (beta + alpha r)^{n alpha} once beta + alpha r > 1
    a = params.beta_float + params.alpha.value * r
    if a <= 1.0:
        return math.inf
    return az / a ** (params.n * params.alpha.value)


@lru_cache(maxsize=256)
def _series_rgamma_log(params: MLRParams, r: int):
    """(sign, log|1/Gamma(beta + alpha r)|^n) for the double-precision route."""
    x = float(_series_arg(params, r))
    rg = reciprocal_gamma(x)
    if rg == 0.0:
        return 0, 0.0
    sign = 1 if rg > 0 else -1
    return sign ** params.n, -params.n * log_gamma_abs(x)


@dataclass(frozen=True)
class _Overflow:
    log10_abs_sum: float


def _series_double(params: MLRParams, z: float, tol: float, cap: int):
    az = abs(z)
    lz = math.log(az) if az > 0 else -math.inf
    terms = []
    running = 0.0
    round_err = 0.0
    small = 0
    r = 0
    last_nonzero = 0.0
    emax = -math.inf
    while True:
        sgn, lg = _series_rgamma_log(params, r)
        if sgn == 0:
            t = 0.0
        else:
            e = lg if r == 0 else r * lz + lg
            emax = max(emax, e)
            if emax > 700:
                # keep walking in logs only, to size the extended pass
                if e < emax - 40 and e < 0:
                    return _Overflow(emax / math.log(10) + math.log10(r + 1))
                r += 1
                if r >= cap:
                    raise ConvergenceError(f"series did not converge within {cap} terms")
                continue
            t = sgn * math.exp(e)
            if z < 0 and r % 2:
                t = -t
            # exp of a log of size |e| carries about |e| ulps of relative error
            round_err += abs(t) * (2.0 + abs(e)) * EPS
        terms.append(t)
        running += t
        if t != 0.0:
            last_nonzero = abs(t)
        rho = _ratio_bound(params, az, r)
        if rho < 0.9 and r > 0:
            if abs(t) <= tol * abs(running):
                small += 1
                if small >= 2:
                    break
            else:
                small = 0
        if r >= cap:
            raise ConvergenceError(f"series did not converge within {cap} terms")
        r += 1
    value = math.fsum(terms)
    rho = _ratio_bound(params, az, r)
    tail = last_nonzero * rho / (1.0 - rho) if rho < 1 else last_nonzero
    # abs_sum is reported through the rounding model so the ladder's 4*EPS*abs_sum matches it
    abs_sum = max(math.fsum(abs(t) for t in terms), round_err / (4 * EPS))
    return value, abs_sum, len(terms), tail


def _series_mp(params: MLRParams, z, tol: float, cap: int, dps: int):
    # 1/Gamma(x + l) = 1/Gamma(x) / (x)_l links terms r and r + k
    l, k, n = params.l, params.k, params.n
    with mpmath.workdps(dps):
        zm = to_mp(z)
        terms = []
        running = mpmath.mpf(0)
        small = 0
        r = 0
        zr = mpmath.mpf(1)
        last_nonzero = mpmath.mpf(0)
        az = abs(float(z))
        rg = []
        args = []
        while True:
            x = to_mp(_series_arg(params, r))
            args.append(x)
            if r < k or rg[r - k] == 0:
                g = mpmath.rgamma(x)
            else:
                x0 = args[r - k]
                poch = x0
                for i in range(1, l):
                    poch *= x0 + i
                g = rg[r - k] / poch
            rg.append(g)
            t = zr * g if n == 1 else zr * g ** n
            terms.append(t)
            running += t
            if t != 0:
                last_nonzero = abs(t)
            rho = _ratio_bound(params, az, r)
            if rho < 0.9 and r > 0:
                if abs(t) <= tol * abs(running):
                    small += 1
                    if small >= 2:
                        break
                else:
                    small = 0
            if r >= cap:
                raise ConvergenceError(f"series did not converge within {cap} terms")
            r += 1
            zr *= zm
        value = mpmath.fsum(terms)
        abs_sum = mpmath.fsum(abs(t) for t in terms)
        rho = _ratio_bound(params, az, r)
        tail = float(last_nonzero) * (rho / (1.0 - rho) if rho < 1 else 1.0)
        return value, abs_sum, len(terms), tail


def _escalate(run, tol: float, cfg: SeriesConfig, first=None):
    """Shared precision ladder for both routes.

    ``run(dps)`` returns (value, abs_sum, terms, tail); dps=None is the
    double-precision pass.
    """
    if cfg.precision != "extended":
        out = first if first is not None else run(None)
        if isinstance(out, _Overflow):
            if cfg.precision == "standard":
                raise ConvergenceError("terms overflow double precision; use extended precision")
            digits = out.log10_abs_sum + 10
        elif out is not None:
            value, abs_sum, nterms, tail = out
            cond = abs_sum / abs(value) if value != 0 else math.inf
            err = tail + 4 * EPS * abs_sum
            if err <= tol * max(abs(value), 1e-300) or cfg.precision == "standard":
                # a garbage value also hides the condition number, so check for lost digits too
                if cfg.precision == "standard" and (cond > cfg.max_condition or err >= abs(value)):
                    raise ConvergenceError(
                        f"cancellation too severe for double precision (condition {cond:.3g}, "
                        f"error estimate {err:.3g}); use extended precision")
                return SeriesValue(value, err, nterms, err <= tol * max(abs(value), 1e-300), cond,
                                   abs_sum=abs_sum)
            digits = math.log10(max(abs_sum, 1.0)) + 10
        else:
            digits = 330.0
    else:
        digits = 10.0
    dps = int(digits - math.log10(tol)) + cfg.extra_digits
    for _ in range(6):
        value, abs_sum, nterms, tail = run(dps)
        # bookkeeping in mpf: abs_sum can exceed the double range
        abs_sum = mpmath.mpf(abs_sum)
        fv = float(value)
        cond = float(abs_sum / abs(value)) if value != 0 else math.inf
        err = mpmath.mpf(tail) + abs_sum * mpmath.mpf(10) ** (-dps + 2)
        target = tol * max(abs(fv), 1e-300)
        if err <= target:
            return SeriesValue(fv, float(err), nterms, True, cond, True, abs_sum)
        # a garbage value inflates the target, so also size dps from abs_sum
        need = float(mpmath.log10(abs_sum)) - math.log10(tol) + cfg.extra_digits
        dps = int(max(dps + 10, float(mpmath.log10(err / target)) + dps + 5, need))
    raise ConvergenceError(f"no stable value after raising precision to {dps} digits "
                           f"(error estimate {float(err):.3g})")


def mlr_series(params: MLRParams, z: float, tol: float = 1e-12,
               cfg: SeriesConfig = DEFAULT_CONFIG) -> SeriesValue:
    """Sum z^r / Gamma(beta + alpha r)^n directly.

    ``tol`` is relative.  In "auto" mode the sum is redone in extended
    precision when the term magnitudes dwarf the result.
    """
    z = float(z)
    if z == 0.0:
        v = reciprocal_gamma(params.beta_float) ** params.n
        return SeriesValue(v, 0.0, 1, True)

    def run(dps):
        if dps is None:
            return _series_double(params, z, tol, cfg.term_cap)
        return _series_mp(params, z, tol * 1e-2, cfg.term_cap, dps)

    return _escalate(run, tol, cfg)


# ---------------------------------------------------------------------------
# route 2: finite sum of 1F_{nl} functions


def _hyper_pieces(params: MLRParams):
    """For each j < k: (power of z, lambda) with the leading zero terms shifted out."""
    l, k = params.l, params.k
    pieces = []
    for j in range(k):
        lam = params.beta + Fraction(l * j, k)
        shift = 0
        # when lambda is a nonpositive integer the first terms vanish; start later
        while lam <= 0 and lam.denominator == 1:
            lam += l
            shift += 1
        pieces.append((j + k * shift, lam))
    return pieces


def mlr_hypergeom(params: MLRParams, z: float, tol: float = 1e-12,
                  cfg: SeriesConfig = DEFAULT_CONFIG) -> SeriesValue:
    """F as sum_j z^j / Gamma(beta + l j/k)^n * 1F_{nl}(1; Delta(l, .) x n; z^k / l^{nl})."""
    z = float(z)
    l, k, n = params.l, params.k, params.n
    pieces = _hyper_pieces(params)
    if z == 0.0:
        v = reciprocal_gamma(params.beta_float) ** n
        return SeriesValue(v, 0.0, 1, True)

    def lower_of(lam):
        return param_sequence(l, lam) * n

    def run(dps):
        parts = []
        abs_sum = 0.0
        nterms = 0
        tail = 0.0
        if dps is None:
            w = z ** k / float(l) ** (n * l)
            for power, lam in pieces:
                inner_cfg = SeriesConfig(cfg.term_cap, "standard", math.inf, cfg.extra_digits)
                try:
                    val, sv = pfq_raw([1], lower_of(lam), w, tol * 1e-2, inner_cfg)
                except ConvergenceError:
                    return None
                pre = z ** power * reciprocal_gamma(float(lam)) ** n
                if not math.isfinite(pre * val):
                    return None
                parts.append(pre * val)
                # the inner condition number carries through the prefactor
                abs_sum += abs(pre) * sv.abs_sum
                tail += abs(pre) * sv.abs_error_estimate
                nterms += sv.terms_used
            abs_sum = max(abs_sum, math.fsum(abs(p) for p in parts))
            return math.fsum(parts), abs_sum, nterms, tail
        with mpmath.workdps(dps):
            zm = to_mp(z)
            w = zm ** k / mpmath.mpf(l) ** (n * l)
            abs_sum = mpmath.mpf(0)
            for power, lam in pieces:
                # the pieces cancel each other, so each needs accuracy far below tol
                val, sv = pfq_raw([1], lower_of(lam), w, mpmath.mpf(10) ** (-dps + cfg.extra_digits), cfg, dps=dps)
                pre = zm ** power * mpmath.rgamma(to_mp(lam)) ** n
                parts.append(pre * val)
                abs_sum += abs(pre) * sv.abs_sum
                tail += abs(pre) * sv.abs_error_estimate
                nterms += sv.terms_used
            value = mpmath.fsum(parts)
            return value, abs_sum, nterms, tail

    return _escalate(run, tol, cfg)


def mlr_value(params: MLRParams, z: float, tol: float = 1e-12,
              cfg: SeriesConfig = DEFAULT_CONFIG) -> float:
    return mlr_series(params, z, tol, cfg).value


# ---------------------------------------------------------------------------
# Laplace recursion in n


def laplace_recursion_check(params: MLRParams, lam: float, s: float, tol: float = 1e-9) -> float:
    """Relative residual of the Laplace rule that lowers n by one.

    int_0^inf e^{-st} t^{beta-1} F^{(n)}(lam t^alpha) dt = s^{-beta} F^{(n-1)}(lam s^{-alpha})
    """
    from .quadrature import integrate_semiaxis

    if params.n < 2:
        raise DomainError("the recursion needs n >= 2")
    if lam > 0:
        raise DomainError("only lam <= 0 is supported")
    if s <= 0:
        raise DomainError("s must be positive")
    beta = params.beta_float
    if beta <= 0:
        raise DomainError("beta must be positive for the integral to exist at t = 0")
    a = params.alpha.value
    f0 = abs(reciprocal_gamma(beta)) ** params.n
    scale = 2.0 * max(1.0, f0)

    def f(t):
        if t == 0.0:
            return 0.0 if beta > 1 else (f0 if beta == 1 else math.inf)
        return math.exp(-s * t) * t ** (beta - 1.0) * mlr_series(params, lam * t ** a, tol * 1e-3).value

    def bound(t):
        return scale * math.exp(-s * t) * max(t, 1e-300) ** (beta - 1.0)

    lhs = integrate_semiaxis(f, bound, tol * 1e-2, rate=s)
    lower = MLRParams(params.alpha, params.beta, params.n - 1)
    rhs = s ** (-beta) * mlr_series(lower, lam * s ** (-a), tol * 1e-3).value
    return abs(lhs.value - rhs) / max(1.0, abs(rhs))
