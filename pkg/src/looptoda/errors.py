"""Exception hierarchy shared by all modules."""


class TodaError(Exception):
    """Base class for every error raised by looptoda."""


class ValidationError(TodaError, ValueError):
    """Input data violates a documented invariant."""


class DimensionError(TodaError, ValueError):
    """Matrix shapes do not conform."""


class SingularMatrixError(TodaError, ArithmeticError):
    """LU factorisation met a pivot below the singularity threshold."""

    def __init__(self, pivot_index, pivot_magnitude, threshold):
        self.pivot_index = pivot_index
        self.pivot_magnitude = pivot_magnitude
        self.threshold = threshold
        super().__init__(
            f"singular matrix: pivot {pivot_index} has magnitude "
            f"{pivot_magnitude:.3e} < threshold {threshold:.3e}"
        )


class SingularFieldError(TodaError, ArithmeticError):
    """A field could not be evaluated because a matrix was singular at a point."""

    def __init__(self, point, alpha=None, cause=None):
        self.point = point
        self.alpha = alpha
        self.cause = cause
        where = f"alpha={alpha}, " if alpha is not None else ""
        super().__init__(f"singular field at {where}z={point}" + (f": {cause}" if cause else ""))


class PoleError(TodaError, ValueError):
    """A rational function was evaluated at one of its poles."""
