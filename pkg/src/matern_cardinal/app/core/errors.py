"""Exception hierarchy for matern_cardinal."""


class MaternCardinalError(Exception):
    """Base class for all library errors."""


class DomainError(MaternCardinalError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class OutOfWindowError(DomainError):
    """Evaluation point too close to the edge of a data window."""


class UnsupportedOrderError(MaternCardinalError, ValueError):
    """Bessel order not covered by the special-function primitives."""


class InvalidSpecError(MaternCardinalError, ValueError):
    """Kernel specification or kernel id is not valid."""


class InvalidProfileError(MaternCardinalError, ValueError):
    """Radial profile cannot be transformed (e.g. not integrable)."""


class CorruptedGridError(MaternCardinalError):
    """Symbol grid holds non-positive or non-finite values."""


class InsufficientDataError(MaternCardinalError):
    """Too few usable samples for a fit."""


class IllPosedInterpolationError(MaternCardinalError):
    """Cardinal symbol is not positive, interpolation is not well-posed."""


class UsageError(MaternCardinalError):
    """Invalid command-line or configuration input."""


class AccuracyError(MaternCardinalError):
    """A requested accuracy budget could not be met.

    Args:
        message: Human readable description
        achieved: Best accuracy reached before giving up
    """

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class RouteInfeasibleError(AccuracyError):
    """Spatial lattice sum would need more terms than the configured cap."""


class TruncationError(AccuracyError):
    """Lattice-sum tail bound above tolerance at the truncation cap."""


class AliasingError(AccuracyError):
    """Lagrange coefficients did not converge before the grid cap."""


class QuadratureError(AccuracyError):
    """Quadrature error estimate above the requested budget."""
