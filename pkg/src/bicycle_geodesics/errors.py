"""Exception hierarchy shared by all modules."""


class GeodesicError(Exception):
    """Base class for library errors."""


class DomainError(GeodesicError, ValueError):
    """An argument lies outside the domain of the operation."""


class DivergenceError(GeodesicError, ArithmeticError):
    """The requested quantity is infinite (e.g. K(1))."""


class CircleBranchError(GeodesicError):
    """Raised when p = 0: the front track is a unit circle and the
    magnetic/cylindrical description does not exist."""


class SolitonError(GeodesicError):
    """Raised at (a, b) = (1, 0): the curvature is aperiodic."""


class NotApplicableError(GeodesicError):
    """The operation does not apply to this kind of track."""


class DegenerateError(GeodesicError):
    """Frenet data undefined (kappa^2 + b^2 = 0)."""


class IntegrationError(GeodesicError, RuntimeError):
    """The ODE integrator failed; carries the last accepted state."""

    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ExtractionError(GeodesicError):
    """Rigid registration residual above threshold."""


class NoSolutionFound(GeodesicError):
    """No shooting restart converged (not a proof of non-existence)."""


class NearSingularCharacteristic(UserWarning):
    """1 - n is tiny: theta is integrated by quadrature instead of through Pi."""
