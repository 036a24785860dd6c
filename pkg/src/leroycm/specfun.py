"""Gamma-family functions, Pochhammer symbols, pFq series and modified Bessel functions.

Everything here works on real arguments in double precision.  Series that
suffer cancellation are re-run in extended precision (mpmath) when the
caller allows it; see :class:`SeriesConfig`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import ConvergenceError, DivergenceError, DomainError, PoleError

EPS = 2.220446049250313e-16

# Godfrey's Lanczos coefficients (g = 7, 9 terms).
_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SeriesConfig:
    """Knobs shared by every series loop.

    ``precision`` is one of ``"auto"`` (re-run in extended precision when
    cancellation eats the requested accuracy), ``"standard"`` (double only;
    hopeless cancellation raises) or ``"extended"`` (always mpmath).
    """

    term_cap: int = 10_000
    precision: str = "auto"
    max_condition: float = 1e12
    extra_digits: int = 8

    def __post_init__(self):
        if self.precision not in ("auto", "standard", "extended"):
            raise ValueError(f"unknown precision mode {self.precision!r}")
        if self.term_cap < 1:
            raise ValueError("term_cap must be positive")


DEFAULT_CONFIG = SeriesConfig()


@dataclass(frozen=True)
class SeriesValue:
    value: float
    abs_error_estimate: float
    terms_used: int
    converged: bool
    condition: float = 1.0
    extended: bool = False
    abs_sum: float = 0.0  # sum of |terms|; an mpf when it overflows doubles

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class RationalOrder:
    """The order alpha = l/k, stored reduced, with 0 < l/k < 1."""

    l: int
    k: int

    def __post_init__(self):
        l, k = int(self.l), int(self.k)
        if l <= 0 or k <= 0:
            raise DomainError(f"l and k must be positive, got {l}/{k}")
        g = math.gcd(l, k)
        object.__setattr__(self, "l", l // g)
        object.__setattr__(self, "k", k // g)
        if self.l >= self.k:
            raise DomainError(f"order {self.l}/{self.k} must lie in (0, 1)")

    @classmethod
    def parse(cls, text: str | Fraction | "RationalOrder") -> "RationalOrder":
        if isinstance(text, RationalOrder):
            return text
        f = Fraction(text)
        return cls(f.numerator, f.denominator)

    @property
    def value(self) -> float:
        return self.l / self.k

    def as_fraction(self) -> Fraction:
        return Fraction(self.l, self.k)

    def __str__(self):
        return f"{self.l}/{self.k}"


def param_sequence(r: int, lam) -> list:
    """Delta(r, lam) = [lam/r, (lam+1)/r, ..., (lam+r-1)/r]."""
    if r < 1:
        raise DomainError("Delta(r, lam) needs r >= 1")
    return [(lam + i) / r for i in range(r)]  # exact when lam is a Fraction


def _is_nonpositive_int(x) -> bool:
    return x <= 0 and x == int(x)


def _sinpi(x: float) -> float:
    # argument reduction keeps sin(pi x) accurate for large |x|
    r = math.fmod(x, 2.0)
    if r > 1.0:
        r -= 2.0
    elif r < -1.0:
        r += 2.0
    if r == 0.0 or abs(r) == 1.0:
        return 0.0
    if r > 0.5:
        r = 1.0 - r
    elif r < -0.5:
        r = -1.0 - r
    return math.sin(math.pi * r)


def _lanczos_sum(x: float) -> float:
    # x is the shifted argument (Gamma(x + 1))
    a = _LANCZOS[0]
    for i in range(1, len(_LANCZOS)):
        a += _LANCZOS[i] / (x + i)
    return a


def gamma(x: float) -> float:
    """Gamma(x); reflection below 1/2, Lanczos above."""
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x < 0.5:
        return math.pi / (_sinpi(x) * gamma(1.0 - x))
    if x > 171.7:
        return math.inf
    if x == int(x) and x < 30:
        return float(math.factorial(int(x) - 1))
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    # split the power to delay overflow
    half = t ** (0.5 * (x + 0.5))
    return math.sqrt(2.0 * math.pi) * half * math.exp(-t) * half * _lanczos_sum(x)


def log_gamma_abs(x: float) -> float:
    """log|Gamma(x)|."""
    x = float(x)
    if _is_nonpositive_int(x):
        raise PoleError(f"Gamma has a pole at {x}")
    if x < 0.5:
        return math.log(math.pi) - math.log(abs(_sinpi(x))) - log_gamma_abs(1.0 - x)
    x -= 1.0
    t = x + _LANCZOS_G + 0.5
    return _LOG_SQRT_2PI + (x + 0.5) * math.log(t) - t + math.log(_lanczos_sum(x))


def gamma_sign(x: float) -> int:
    x = float(x)
    if x > 0:
        return 1
    if _is_nonpositive_int(x):
        return 0
    return -1 if math.floor(x) % 2 else 1


def reciprocal_gamma(x: float) -> float:
    """1/Gamma(x), exactly zero at the poles of Gamma."""
    x = float(x)
    if _is_nonpositive_int(x):
        return 0.0
    if x < 0.5:
        # 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
        g = gamma(1.0 - x)
        if math.isinf(g):
            return gamma_sign(x) * math.exp(-log_gamma_abs(x))
        return _sinpi(x) * g / math.pi
    if x > 171.0:
        return math.exp(-log_gamma_abs(x))
    return 1.0 / gamma(x)


def pochhammer(c: float, r: int) -> float:
    """Rising factorial (c)_r."""
    if r < 0:
        raise DomainError("pochhammer index must be nonnegative")
    out = 1.0
    for i in range(r):
        out *= c + i
    return out


def pochhammer_split(beta: float, j: int, l: int, k: int, r: int) -> float:
    """(beta + l j / k)_{l r} as l^{l r} times a product of l symbols of index r."""
    if l <= 0 or k <= 0 or r < 0:
        raise DomainError("need l, k > 0 and r >= 0")
    if not 0 <= j < k:
        raise DomainError("need 0 <= j < k")
    lam = beta + l * j / k
    out = float(l) ** (r * l)
    for i in range(l):
        out *= pochhammer((lam + i) / l, r)
    return out


# ---------------------------------------------------------------------------
# generic series driver


def _mp_dps_for(condition: float, tol: float, cfg: SeriesConfig) -> int:
    digits = 15 + max(0.0, math.log10(max(condition, 1.0))) + max(0.0, -math.log10(tol) - 15)
    return int(digits) + cfg.extra_digits


def to_mp(x):
    """Exact conversion to mpf (Fractions are divided at working precision)."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _pfq_loop(upper, lower, z, tol, cap, mp_ctx=None):
    """Raw running-term loop.  Returns (value, abs_sum, terms, last_abs, ratio)."""
    polynomial = any(_is_nonpositive_int(float(a)) for a in upper)
    if mp_ctx is not None:
        upper = [to_mp(a) for a in upper]
        lower = [to_mp(b) for b in lower]
        z = to_mp(z)
        term = mpmath.mpf(1)
    else:
        upper = [float(a) for a in upper]
        lower = [float(b) for b in lower]
        z = float(z)
        term = 1.0
    terms = [term]
    running = term
    small = 0
    ratio = 0.0
    n = 0
    while True:
        num = z
        for a in upper:
            num *= a + n
        den = n + 1
        for b in lower:
            den *= b + n
        new = term * num / den
        n += 1
        ratio = abs(float(new / term)) if term != 0 else 0.0
        term = new
        if mp_ctx is None and not math.isfinite(term):
            raise OverflowError("pFq terms overflow double precision")
        terms.append(term)
        running += term
        if term == 0 and polynomial:
            break
        # the plain running sum only steers the stopping rule
        if abs(term) <= tol * abs(running) or (running == 0 and term == 0):
            small += 1
            if small >= 2:
                break
        else:
            small = 0
        if n >= cap:
            raise ConvergenceError(f"pFq did not converge within {cap} terms")
    if mp_ctx is not None:
        value = mpmath.fsum(terms)
        abs_sum = mpmath.fsum(abs(t) for t in terms)
    else:
        value = math.fsum(terms)
        abs_sum = math.fsum(abs(t) for t in terms)
    return value, abs_sum, len(terms), abs(float(term)), ratio


def _tail_bound(last_abs: float, ratio: float) -> float:
    if ratio < 0.9:
        return last_abs * ratio / (1.0 - ratio)
    return last_abs * 10.0


def pfq_raw(upper: Sequence, lower: Sequence, z, tol: float = 1e-15,
            cfg: SeriesConfig = DEFAULT_CONFIG, dps: int | None = None):
    """pFq returning ``(value, SeriesValue)`` where value may be an mpf.

    ``dps`` forces an extended-precision pass at that many digits.
    """
    p, q = len(upper), len(lower)
    for b in lower:
        if _is_nonpositive_int(float(b)):
            raise DomainError(f"lower parameter {b} is a nonpositive integer")
    polynomial = any(_is_nonpositive_int(float(a)) for a in upper)
    if not polynomial:
        if p > q + 1:
            raise DivergenceError(f"{p}F{q} diverges for z != 0")
        if p == q + 1 and abs(float(z)) >= 1.0:
            raise DivergenceError(f"{p}F{q} needs |z| < 1, got {float(z)}")
    if float(z) == 0.0 and dps is None:
        return 1.0, SeriesValue(1.0, 0.0, 1, True)

    if dps is None and cfg.precision != "extended":
        try:
            value, abs_sum, nterms, last, ratio = _pfq_loop(upper, lower, z, tol, cfg.term_cap)
        except OverflowError:
            if cfg.precision == "standard":
                raise ConvergenceError("pFq terms overflow double precision") from None
            value, abs_sum, nterms, last, ratio = math.nan, math.inf, 0, math.inf, 1.0
        cond = abs_sum / abs(value) if value != 0 else math.inf
        err = _tail_bound(last, ratio) + 4.0 * EPS * abs_sum
        ok = err <= max(tol, EPS) * abs(value) * 10 or err <= 1e-300
        if ok or cfg.precision == "standard":
            if cfg.precision == "standard" and cond > cfg.max_condition:
                raise ConvergenceError(
                    f"cancellation too severe for double precision (condition {cond:.3g})")
            return value, SeriesValue(value, err, nterms, err <= tol * max(abs(value), 1e-300) * 10, cond,
                                      abs_sum=abs_sum)
        dps = _mp_dps_for(cond, tol, cfg) if math.isfinite(cond) else 340 + cfg.extra_digits
    if dps is None:
        dps = 30 + cfg.extra_digits
    with mpmath.workdps(dps):
        value, abs_sum, nterms, last, ratio = _pfq_loop(upper, lower, z, tol,
                                                        cfg.term_cap, mpmath.mp)
        cond = float(abs_sum / abs(value)) if value != 0 else math.inf
        err = float(_tail_bound(last, ratio) + abs_sum * mpmath.mpf(10) ** (-dps + 2))
    fv = float(value)
    return value, SeriesValue(fv, err, nterms, err <= tol * max(abs(fv), 1e-300) * 10, cond, True, abs_sum)


def pFq(upper: Sequence, lower: Sequence, z: float, tol: float = 1e-15,
        cfg: SeriesConfig = DEFAULT_CONFIG) -> SeriesValue:
    """Generalized hypergeometric series, summed term by term.

    Each term follows from the previous one by one multiply (or divide) per
    parameter; the partial sums are accumulated with ``math.fsum``.
    """
    return pfq_raw(list(upper), list(lower), z, tol, cfg)[1]


# ---------------------------------------------------------------------------
# Bessel functions


def bessel_i(nu: float, x: float, tol: float = 1e-16) -> float:
    """Modified Bessel function of the first kind via its ascending series."""
    if x < 0:
        raise DomainError("bessel_i needs x >= 0")
    if x == 0:
        if nu == 0:
            return 1.0
        if nu > 0 or _is_nonpositive_int(nu):
            return 0.0
        return math.inf
    if nu < 0 and nu == int(nu):
        nu = -nu
    half = 0.5 * x
    q = half * half
    # I_nu(x) = (x/2)^nu * sum_r q^r / (r! Gamma(r + nu + 1))
    terms = []
    r = 0
    term = reciprocal_gamma(nu + 1.0)
    while True:
        terms.append(term)
        r += 1
        term = term * q / (r * (nu + r))
        if r > q and abs(term) < tol * abs(math.fsum(terms)):
            break
        if r > 2000:
            raise ConvergenceError("bessel_i series did not converge")
    return half ** nu * math.fsum(terms)


def bessel_k(nu: float, x: float) -> float:
    """K_nu(x) = pi (I_{-nu} - I_nu) / (2 sin nu pi), noninteger nu only."""
    if x <= 0:
        raise DomainError("bessel_k needs x > 0")
    if nu == int(nu):
        raise DomainError("bessel_k supports noninteger orders only")
    return math.pi * (bessel_i(-nu, x) - bessel_i(nu, x)) / (2.0 * _sinpi(nu))


def bessel_j0_of(x: float) -> float:
    """J_0(2 sqrt(x)) = sum_r (-x)^r / (r!)^2."""
    if x < 0:
        raise DomainError("bessel_j0_of needs x >= 0")
    terms = [1.0]
    term = 1.0
    r = 0
    while True:
        r += 1
        term *= -x / (r * r)
        terms.append(term)
        if abs(term) < 1e-18 * max(1.0, abs(math.fsum(terms))) and r > x:
            break
    return math.fsum(terms)
