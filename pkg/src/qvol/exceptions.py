"""Exception hierarchy for the qvol package."""
from typing import Optional


class QvolError(Exception):
    """Base class for every error raised by qvol."""


class DomainError(QvolError, ValueError):
    """An argument lies outside the domain of an operation."""


class PoleProximityError(DomainError):
    """A quantum dilogarithm argument is too close to a pole."""

    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance


class RegionError(DomainError):
    """A point does not belong to the requested region."""


class SingularLinkingMatrixError(DomainError):
    """The linking matrix of a surgery presentation is singular."""


class HypothesisError(QvolError, ValueError):
    """The volume hypothesis of the asymptotic expansion is not met."""


class ConvergenceError(QvolError, RuntimeError):
    """A numerical procedure did not reach its tolerance."""


class ContinuationError(ConvergenceError):
    """Continuation along the cone angle broke down."""

    def __init__(self, message: str, last_good_theta: Optional[float] = None):
        super().__init__(message)
        self.last_good_theta = last_good_theta


class ResolutionError(ConvergenceError):
    """Adaptive quadrature needed more panels than allowed."""


class PrecisionError(QvolError, RuntimeError):
    """Cancellation exceeds the available mantissa headroom."""

    def __init__(self, message: str, cancellation_estimate: float):
        super().__init__(message)
        self.cancellation_estimate = cancellation_estimate
