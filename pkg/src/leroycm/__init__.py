"""Mittag-Leffler functions of Le Roy type and their Bernstein weights."""

from .errors import (
    BracketError,
    ClassificationError,
    ConvergenceError,
    DivergenceError,
    DomainError,
    LeroyError,
    PoleError,
    QuadratureError,
    SchemaError,
)
from .mlr import Classification, MLRParams, mlr_hypergeom, mlr_series, mlr_value
from .specfun import RationalOrder, SeriesConfig, SeriesValue, pFq, reciprocal_gamma

from .weight import weight_eval, weight_profile

__version__ = "0.1.0"

__all__ = [
    "BracketError",
    "ClassificationError",
    "ConvergenceError",
    "DivergenceError",
    "DomainError",
    "LeroyError",
    "PoleError",
    "QuadratureError",
    "SchemaError",
    "Classification",
    "MLRParams",
    "mlr_hypergeom",
    "mlr_series",
    "mlr_value",
    "RationalOrder",
    "SeriesConfig",
    "SeriesValue",
    "pFq",
    "reciprocal_gamma",
    "weight_eval",
    "weight_profile",
]
