"""Exception hierarchy.  Each class carries the CLI exit code it maps to."""


class LeroyError(Exception):
    exit_code = 1


class DomainError(LeroyError, ValueError):
    """Argument outside the operation's domain (precondition failure)."""

    exit_code = 2


class PoleError(DomainError):
    pass


class ClassificationError(DomainError):
    """Parameters fall in the wrong ln-vs-k class for the operation."""


class BracketError(DomainError):
    pass


class ConvergenceError(LeroyError, ArithmeticError):
    exit_code = 3


class DivergenceError(ConvergenceError):
    pass


class QuadratureError(ConvergenceError):
    pass


class InconclusiveScanError(ConvergenceError):
    pass


class SchemaError(DomainError):
    """A persisted record has a missing or unknown schema_version."""
