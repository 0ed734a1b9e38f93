"""Exception and warning types shared across the package."""


class FracgroundError(Exception):
    """Base class for all package errors."""


class ParameterError(FracgroundError, ValueError):
    pass


class CapacityError(FracgroundError):
    """Raised when an O(n^{2N}) routine is asked to run on too large a grid."""


class NumericError(FracgroundError, ArithmeticError):
    pass


class ConstraintError(FracgroundError):
    """The constraint set {V = 1} cannot be reached from the given field."""


class ResolutionError(FracgroundError):
    def __init__(self, message, min_admissible=None):
        super().__init__(message)
        self.min_admissible = min_admissible


class DomainError(FracgroundError):
    """Torus too small for the requested construction."""


class GeometryError(FracgroundError):
    pass


class CrossingNotFound(FracgroundError):
    pass


class SnapshotError(FracgroundError, IOError):
    pass


class TruncationWarning(UserWarning):
    """Significant mass sits near the torus boundary; periodization error may be large."""
