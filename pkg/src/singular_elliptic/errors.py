"""Exception hierarchy shared by the solver modules."""


class SingularEllipticError(Exception):
    """Base class for all package errors."""


class ParameterError(SingularEllipticError, ValueError):
    """An input lies outside the admissible parameter range."""


class ShapeError(SingularEllipticError, ValueError):
    """Vector length or grid mismatch."""


class NumericError(SingularEllipticError, ArithmeticError):
    """A linear solve failed its residual check."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class ResolutionError(ParameterError):
    """A mollification radius is not resolved by the grid."""


class NonConvergenceError(SingularEllipticError, RuntimeError):
    """An iteration ran out of budget.

    ``gap`` holds the last bracket gap (inner iteration) or ``trace`` the
    per-level sup-norm differences (outer iteration).
    """

    def __init__(self, message, gap=None, trace=None):
        super().__init__(message)
        self.gap = gap
        self.trace = trace if trace is not None else []


class UnsupportedMeasureError(SingularEllipticError, ValueError):
    """Measure type not handled by the requested estimator."""


class ConfigError(ParameterError):
    """A run configuration is malformed; ``key`` names the offending entry."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
