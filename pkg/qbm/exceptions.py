"""
Error types raised by qbm.

Every error carries the process exit code the command line uses when it
escapes a command, and can describe itself as a plain dictionary for the
machine-readable error report.
"""


class QBMError(Exception):
    """Root of all qbm errors."""

    exit_code = 1

    def to_dict(self):
        info = {'error': type(self).__name__, 'message': str(self),
                'exit_code': self.exit_code}
        for key in ('residual', 'where', 'min_eig', 't'):
            value = getattr(self, key, None)
            if value is not None:
                info[key] = float(value)
        return info


class DomainError(QBMError, ValueError):
    """An input lies outside the domain of the operation."""

    exit_code = 4


class OutOfRangeError(DomainError):
    """A time lies outside the solved horizon of a table."""


class DirectionError(DomainError):
    """An s-ordered transform was requested towards larger s."""


class UnsupportedConfigurationError(DomainError):
    """A valid BathSpec that the requested operation cannot handle."""


class ConfigurationError(QBMError, ValueError):
    """Inconsistent tables, grids or configuration files."""

    exit_code = 4


class CoverageError(QBMError):
    """Phase-space extents too small to hold the probability mass."""

    exit_code = 4


class ResolutionError(QBMError):
    """A convolution kernel is not resolved by the grid spacing."""

    exit_code = 4


class NotYetDefinedError(QBMError):
    """
    The pointer weight kernel is not positive definite yet.

    Expected at early times; ``min_eig`` holds the smallest eigenvalue of
    the kernel covariance at time ``t``.
    """

    exit_code = 4

    def __init__(self, message, min_eig=None, t=None):
        super().__init__(message)
        self.min_eig = min_eig
        self.t = t


class SingularPropagatorError(QBMError):
    """det V(t) fell below the numerical floor."""

    exit_code = 5


class NumericalFailure(QBMError, RuntimeError):
    """
    A numerical procedure did not converge.

    ``residual`` is the final error estimate and ``where`` the abscissa
    (time or frequency) at which it was observed, when known.
    """

    exit_code = 5

    def __init__(self, message, residual=None, where=None):
        super().__init__(message)
        self.residual = residual
        self.where = where


class ConventionViolation(QBMError, AssertionError):
    """A phase-space convention tripwire fired."""

    exit_code = 5
