"""Tanh-sinh (double-exponential) quadrature on finite intervals and on [0, inf)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .errors import DomainError, QuadratureError

Func = Callable[[float], float]


@dataclass(frozen=True)
class QuadConfig:
    t_max: float = 4.5  # nodes reach within ~1e-61 (relative) of the endpoints
    min_level: int = 3
    max_level: int = 10
    max_cutoff: float = 1e4


DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int
    segments: str

    def __post_init__(self):
        if self.abs_error_estimate < 0 or self.evaluations <= 0:
            raise ValueError("inconsistent quadrature result")


def _node(t: float, width: float):
    """Distance from the nearer endpoint and the weight dx/dt at parameter t."""
    u = 0.5 * math.pi * math.sinh(t)
    au = abs(u)
    q = math.exp(-2.0 * au)
    dist = width * q / (1.0 + q)
    # dx/dt = width/2 * (pi/2) cosh t * sech^2 u, written to avoid overflow
    w = width * 0.5 * (0.5 * math.pi) * math.cosh(t) * 4.0 * q / (1.0 + q) ** 2
    return dist, w


def integrate_interval(f: Func, a: float, b: float, tol: float = 1e-10,
                       f_near_a: Optional[Func] = None, f_near_b: Optional[Func] = None,
                       cfg: QuadConfig = DEFAULT_QUAD) -> QuadratureResult:
    """Integrate f over [a, b] by tanh-sinh with level doubling.

    ``f_near_a(d)`` / ``f_near_b(d)`` evaluate the integrand at a + d / b - d
    and let singular endpoints be sampled without rounding d away.
    The error estimate is the change between the last two levels.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or b < a:
        raise DomainError(f"bad interval [{a}, {b}]")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1, "empty")
    width = b - a
    mid = 0.5 * (a + b)
    evals = 0

    def sample(t: float) -> float:
        nonlocal evals
        if t == 0.0:
            evals += 1
            _, w = _node(0.0, width)
            return w * f(mid)
        d, w = _node(t, width)
        if w == 0.0:
            return 0.0
        if t > 0:
            if f_near_b is not None:
                evals += 1
                return w * f_near_b(d)
            x = b - d
            if x >= b:
                return 0.0
        else:
            if f_near_a is not None:
                evals += 1
                return w * f_near_a(d)
            x = a + d
            if x <= a:
                return 0.0
        evals += 1
        return w * f(x)

    h = 1.0
    kmax = int(cfg.t_max / h)
    acc = math.fsum(sample(k * h) for k in range(-kmax, kmax + 1))
    prev = acc * h
    est = math.inf
    for level in range(1, cfg.max_level + 1):
        h *= 0.5
        kmax = int(cfg.t_max / h)
        new = [sample(k * h) for k in range(-kmax, kmax + 1) if k % 2]
        acc = math.fsum([acc] + new)
        cur = acc * h
        est = abs(cur - prev)
        if not math.isfinite(cur):
            raise QuadratureError("integrand produced a non-finite value")
        if level >= cfg.min_level and est <= tol:
            return QuadratureResult(cur, est, evals, f"tanh-sinh [{a:g}, {b:g}], level {level}")
        prev = cur
    raise QuadratureError(
        f"tanh-sinh did not reach tol {tol:g} on [{a:g}, {b:g}] (last change {est:.3g})")


def tail_cutoff(decay_bound: Func, tol: float, start: float = 1.0,
                cfg: QuadConfig = DEFAULT_QUAD) -> float:
    """Smallest Y >= start (to ~1%) with int_Y^inf decay_bound < tol, by doubling then bisection.

    The search never looks below ``start``, so bounds that are only meaningful
    (or integrable) away from 0 are fine.
    """
    edges = [start, 2.0 * start]
    pieces = []
    while True:
        lo, hi = edges[-2], edges[-1]
        piece = integrate_interval(decay_bound, lo, hi, tol * 1e-3, cfg=cfg).value
        pieces.append(piece)
        # the running tail estimate is everything past the last edge
        if hi > 4 * start and piece < tol * 1e-3 and (len(pieces) < 2 or piece <= pieces[-2]):
            break
        if hi > cfg.max_cutoff:
            raise QuadratureError(f"decay bound still significant beyond y = {cfg.max_cutoff:g}")
        edges.append(2.0 * hi)
    # beyond[i] bounds the integral past edges[i]; the last piece doubles as slack for [edges[-1], inf)
    beyond = [0.0] * len(edges)
    beyond[-1] = pieces[-1]
    for i in range(len(edges) - 2, -1, -1):
        beyond[i] = beyond[i + 1] + pieces[i]
    if beyond[0] < tol:
        return edges[0]
    j = next(i for i in range(1, len(edges)) if beyond[i] < tol)
    lo, hi = edges[j - 1], edges[j]
    for _ in range(8):
        m = 0.5 * (lo + hi)
        extra = integrate_interval(decay_bound, m, edges[j], tol * 1e-3, cfg=cfg).value
        if extra + beyond[j] < tol:
            hi = m
        else:
            lo = m
    return hi


def integrate_semiaxis(f: Func, decay_bound: Func, tol: float = 1e-10,
                       f_near_a: Optional[Func] = None, cutoff: Optional[float] = None,
                       rate: Optional[float] = None,
                       cfg: QuadConfig = DEFAULT_QUAD) -> QuadratureResult:
    """Integrate f over [0, inf): tanh-sinh on [0, Y*] plus a bounded tail.

    Y* is the point beyond which the integral of ``decay_bound`` is below
    tol/2.  ``rate`` (an exponential decay rate) only sets the initial scale of
    the cutoff search.
    """
    if cutoff is None:
        start = 1.0 if not rate else max(1.0 / rate, 1e-3)
        cutoff = tail_cutoff(decay_bound, 0.5 * tol, start, cfg)
    tail = integrate_interval(decay_bound, cutoff, 2 * cutoff, tol * 1e-3, cfg=cfg).value
    core = integrate_interval(f, 0.0, cutoff, 0.5 * tol, f_near_a=f_near_a, cfg=cfg)
    return QuadratureResult(core.value, core.abs_error_estimate + 2.0 * tail, core.evaluations,
                            f"tanh-sinh [0, {cutoff:.6g}] + tail bound {2.0 * tail:.3g}")
