"""Exception types raised by the package.

Every error carries a short machine-readable ``code`` that the command
line reports use as a reason code.
"""


class AmpQEDError(Exception):
    """Base class for all package errors."""

    code = "error"


class ConfigError(AmpQEDError, ValueError):
    """Malformed or inconsistent scenario configuration."""

    code = "config-error"


class GridMismatch(AmpQEDError, ValueError):
    """A spatial grid does not cover the medium or is not supported."""

    code = "grid-mismatch"


class GridTooCoarse(AmpQEDError):
    """Quadrature error estimate exceeds the requested tolerance."""

    code = "grid-too-coarse"

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class NotReciprocal(AmpQEDError):
    """Conductivity kernel is not symmetric under transposition."""

    code = "not-reciprocal"


class NotHermitian(AmpQEDError):
    """Kernel expected to be Hermitian is not."""

    code = "not-hermitian"


class NonPositiveSpectrum(AmpQEDError):
    """Square root requested for a kernel with negative eigenvalues."""

    code = "non-positive-spectrum"


class ZeroEigenvalue(AmpQEDError):
    """Sign of an eigenvalue is undefined below the regularizer."""

    code = "zero-eigenvalue"


class SingularOperator(AmpQEDError):
    """Maxwell operator is numerically singular."""

    code = "singular-operator"

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class AnalyticityViolation(AmpQEDError):
    """Green function has a pole in the upper half of the frequency plane."""

    code = "analyticity-violation"

    def __init__(self, message, poles=()):
        super().__init__(message)
        self.poles = tuple(poles)
