"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation problems exit 2, numerical
degeneracies exit 3, I/O failures exit 4.
"""


class FracidxError(Exception):
    """Base class for all package errors."""


class ValidationError(FracidxError, ValueError):
    """Invalid parameters or inputs (CLI exit code 2)."""


class CLTRegimeError(ValidationError):
    """Requested normal-limit inference outside the valid index range."""


class DegenerateStatisticError(FracidxError):
    """A statistic required to be positive came out zero or negative (exit 3)."""


class DegenerateVariogramError(DegenerateStatisticError):
    """An empirical variogram value is zero, so its log is undefined."""


class NonpositiveGapError(DegenerateStatisticError):
    """The kappa-differenced variogram statistic is nonpositive at some lag."""


class EmbeddingError(FracidxError):
    """Circulant embedding of a covariance is not nonnegative definite (exit 3)."""
