"""Exception hierarchy shared across the package.

Validation errors map to CLI exit code 2, numeric failures to exit code 3.
"""


class ToricostError(Exception):
    """Base class for all package errors."""


class ValidationError(ToricostError):
    """Bad arguments, malformed configuration, or violated preconditions."""


class UnknownChartError(ValidationError):
    pass


class UnknownSystemError(ValidationError):
    pass


class UnknownCostError(ValidationError):
    pass


class ChartDomainError(ValidationError):
    """Coordinates outside the declared chart ranges."""


class UnsupportedMeasureError(ValidationError):
    """Discrete measure shape the exact solver cannot handle
    (non-uniform weights, mismatched support sizes, or oversized supports)."""


class NumericError(ToricostError):
    """Numerical procedure failed to produce a trustworthy result."""


class SingularPointError(NumericError):
    """Evaluation requested at a point of the singular locus."""


class NewtonDivergenceError(NumericError):
    """Implicit solve did not converge within the iteration budget."""

    def __init__(self, message, n_failed=None):
        super().__init__(message)
        self.n_failed = n_failed


class SinkhornConvergenceError(NumericError):
    """Scaling iterations stopped above tolerance; carries the achieved defect."""

    def __init__(self, message, defect):
        super().__init__(message)
        self.defect = defect
