"""Exception types for numerically meaningful failure modes."""


class QwfluorError(Exception):
    """Base class for all package-specific errors."""


class SolverError(QwfluorError):
    """Linear-algebra failure (singular or ill-conditioned steady-state system)."""


class TruncationError(QwfluorError):
    """Fock-space truncation search hit its cap with residual population."""


class StabilityError(QwfluorError):
    """Propagation grew beyond what a dissipative generator allows."""


class GridError(QwfluorError):
    """A time or frequency grid is too short or too coarse for the request."""


class ModelError(QwfluorError):
    """Absorption-model parameters violate physical bounds."""


class SpectralLeakageError(QwfluorError):
    """Spectrum normalization check failed; the window or tau range is too small."""


class UnsupportedOrderError(QwfluorError):
    """Filtered moments are implemented for total operator order m+n <= 2 only."""


class UndefinedPhaseError(QwfluorError):
    """Phase requested for a moment whose modulus is numerically zero."""


class ConfigError(QwfluorError):
    """Configuration file or command-line value is invalid."""
