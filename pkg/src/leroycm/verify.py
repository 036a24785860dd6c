"""Round-trip check F^{(n)}(-x) = int_0^inf e^{-xy} m(y) dy (+ point mass at the radius)."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

from .errors import ClassificationError, DomainError, QuadratureError
from .mlr import Classification, MLRParams, mlr_series
from .quadrature import QuadratureResult, integrate_interval, tail_cutoff
from .specfun import pFq
from .weight import (
    atom_beta,
    log_weight_asymptotic_tail,
    radius,
    weight_atom,
    weight_eval,
    weight_near_radius,
)

_WEIGHT_TOL = 1e-13

STANDARD_GRID = (("1/2", 1, 2), ("1/2", "3/4", 2), ("1/3", 1, 2), ("1/4", 1, 2), ("1/3", "2/3", 3), ("3/7", 1, 2))
STANDARD_X = (0.0, 0.5, 1.0, 2.0, 5.0)


def standard_grid() -> list[MLRParams]:
    return [MLRParams.of(*t) for t in STANDARD_GRID]


class _NodeCache:
    """Weight values at quadrature nodes, shared across x for one parameter triple."""

    def __init__(self, params: MLRParams):
        self.params = params
        self.R = radius(params)
        self._at = {}
        self._near = {}
        self._lock = threading.Lock()

    def at(self, y: float) -> float:
        v = self._at.get(y)
        if v is None:
            v = weight_eval(self.params, y, _WEIGHT_TOL).value
            with self._lock:
                self._at[y] = v
        return v

    def near_radius(self, d: float) -> float:
        """m(R - d), keeping d exact close to the endpoint."""
        v = self._near.get(d)
        if v is None:
            if d < 0.05 * self.R:
                v = weight_near_radius(self.params, d)
            else:
                v = weight_eval(self.params, self.R - d, _WEIGHT_TOL).value
            with self._lock:
                self._near[d] = v
        return v


@lru_cache(maxsize=64)
def _nodes(params: MLRParams) -> _NodeCache:
    return _NodeCache(params)


@dataclass(frozen=True)
class BernsteinCheck:
    params: MLRParams
    x: float
    lhs: float
    rhs: float
    residual: float
    quadrature: QuadratureResult
    atom: float
    critical_extension: bool  # l n = k lies outside the l n < k hypothesis of the representation
    cutoff: float

    def summary(self) -> str:
        flag = " [CRITICAL extension: finite support + Heaviside cutoff]" if self.critical_extension else ""
        return (f"{self.params.label()} x={self.x:g}: F={self.lhs:.15g} integral={self.rhs:.15g} "
                f"residual={self.residual:.3g}{flag}")


def _check_preconditions(params: MLRParams):
    cls = params.classification()
    if cls is Classification.SUPER:
        raise ClassificationError(f"{params.label()}: l*n > k, no weight function")
    if params.beta <= params.alpha.as_fraction():
        raise DomainError("the representation needs beta > l/k")
    if cls is Classification.CRITICAL and params.beta < atom_beta(params.n):
        raise DomainError(
            f"{params.label()}: beta < (n+1)/(2n), the weight is not integrable at y = {radius(params):g}")


@lru_cache(maxsize=64)
def sub_cutoff(params: MLRParams, tol: float) -> tuple[float, float]:
    """(Y*, tail bound) for a SUB weight.

    The tail bound is the large-y shape with its exponent coefficient halved,
    scaled to dominate |m| at calibration points where the shape is small.
    """
    shape = lambda y: math.exp(0.5 * log_weight_asymptotic_tail(params, y))  # noqa: E731
    # calibrate where the unit shape falls from e^-4 to e^-16 and m is still resolved
    y = 0.5
    while log_weight_asymptotic_tail(params, y) > -4.0 and y < 200:
        y *= 1.05
    ratios = []
    yy = y
    while log_weight_asymptotic_tail(params, yy) > -16.0 and yy < 400:
        ev = weight_eval(params, yy, _WEIGHT_TOL)
        if abs(ev.value) > 100 * ev.abs_error_estimate:
            ratios.append((abs(ev.value) + ev.abs_error_estimate) / shape(yy))
        yy *= 1.05
    if not ratios:
        raise QuadratureError(f"could not calibrate the tail bound for {params.label()}")
    K = 2.0 * max(ratios)
    bound = lambda yy: K * shape(yy) if yy > 0 else K  # noqa: E731
    Y = tail_cutoff(bound, 0.25 * tol, start=max(y, 1.0))
    tail = integrate_interval(bound, Y, 2 * Y, tol * 1e-3).value
    return max(Y, 1.5 * y), tail


def bernstein_check(params: MLRParams, x: float, tol: float = 1e-10) -> BernsteinCheck:
    """Compare F(-x) against the Laplace integral of the weight."""
    _check_preconditions(params)
    if x < 0:
        raise DomainError("x must be nonnegative")
    lhs = mlr_series(params, -x, 1e-14).value
    cache = _nodes(params)
    cls = params.classification()
    if cls is Classification.CRITICAL:
        R = cache.R
        quad = integrate_interval(
            lambda y: math.exp(-x * y) * cache.at(y), 0.0, R, tol,
            f_near_b=lambda d: math.exp(-x * (R - d)) * cache.near_radius(d))
        atom = weight_atom(params)
        rhs = quad.value + atom * math.exp(-x * R)
        cutoff = R
    else:
        Y, tail = sub_cutoff(params, tol)
        core = integrate_interval(lambda y: math.exp(-x * y) * cache.at(y), 0.0, Y, 0.5 * tol)
        # successive-cutoff check: extending to 1.25 Y* must not move the value
        ext = integrate_interval(lambda y: math.exp(-x * y) * cache.at(y), Y, 1.25 * Y, 0.5 * tol)
        if abs(ext.value) > tol:
            raise QuadratureError(f"tail beyond Y* = {Y:.4g} contributes {ext.value:.3g} > tol")
        quad = QuadratureResult(core.value + ext.value, core.abs_error_estimate + ext.abs_error_estimate + tail,
                                core.evaluations + ext.evaluations,
                                f"{core.segments} + [{Y:.4g}, {1.25 * Y:.4g}] + tail bound {tail:.3g}")
        atom = 0.0
        rhs = quad.value
        cutoff = 1.25 * Y
    residual = abs(lhs - rhs) / max(1.0, abs(lhs))
    return BernsteinCheck(params, x, lhs, rhs, residual, quad, atom, cls is Classification.CRITICAL, cutoff)


def verify_bernstein(params: MLRParams, x: float, tol: float = 1e-10) -> float:
    """Relative residual |F(-x) - int e^{-xy} m(y) dy| / max(1, |F(-x)|)."""
    return bernstein_check(params, x, tol).residual


def arcsine_laplace(x: float) -> float:
    """Known Laplace transform of 2/(pi sqrt(4 - y^2)) on [0, 2): 0F1(;1;x^2) - (4x/pi) 1F2(1; 3/2, 3/2; x^2)."""
    x2 = x * x
    return pFq([], [1], x2).value - 4.0 * x / math.pi * pFq([1], [1.5, 1.5], x2).value
