"""Exception hierarchy shared across the package."""


class LandauError(Exception):
    """Base class for all package errors."""


class DegenerateFieldError(LandauError, ValueError):
    """Raised when B = 0 makes the cyclotron frequency undefined."""


class ParameterError(LandauError, ValueError):
    """Raised for physically invalid parameters."""


class HermiteRangeError(LandauError, ValueError):
    """Raised when the requested Hermite order exceeds the configured maximum."""


class ResolutionError(LandauError):
    """Raised when a grid cannot resolve the state it carries."""


class ShiftError(LandauError, ValueError):
    """Raised for a translation that the grid cannot represent exactly."""


class NoPhaseError(LandauError):
    """Raised when two states are (numerically) orthogonal."""


class IllConditionedError(LandauError):
    """Raised when repeated operator application blows up the norm."""


class BoundaryError(LandauError):
    """Raised when an evolved packet reaches the edge of the box."""


class SingularityError(LandauError, ZeroDivisionError):
    """Raised at the pole of the longitudinal resistivity."""
