"""Exception hierarchy shared by all modules of the package."""


class GsqgError(Exception):
    """Base class for every error raised by :mod:`gsqg_patches`."""


class DomainError(GsqgError, ValueError):
    """An argument lies outside the admissible domain of an operation."""


class PoleError(DomainError):
    """A Gamma-function argument hits a pole (nonpositive integer)."""


class SingularityError(GsqgError, ValueError):
    """Coincident points were passed to a singular kernel."""


class GeometryError(GsqgError, ValueError):
    """A patch geometry is degenerate (nonpositive radius, overlap, exit from the domain)."""


class InfeasibleFluxError(GsqgError, ValueError):
    """The flux constraint cannot be met with a real positive radius."""


class NotInRangeError(GsqgError, ValueError):
    """A right-hand side carries modes outside the range of the linear operator."""


class ConvergenceError(GsqgError, RuntimeError):
    """An iterative method failed to converge.

    Parameters
    ----------
    message : str
        Human-readable description.
    report : dict, optional
        Diagnostic information (best iterate, residual trace, ...).
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report if report is not None else {}


class SingularJacobianError(ConvergenceError):
    """The Newton matrix is numerically singular."""


class ConfigError(GsqgError, ValueError):
    """A run configuration failed validation."""
