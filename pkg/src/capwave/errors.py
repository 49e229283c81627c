"""Exception types shared across the package."""


class CapwaveError(Exception):
    """Base class for all package-specific errors."""


class SupportOverflowError(CapwaveError):
    """A spectral product would exceed the exactly representable frequency range."""


class UndefinedSymbolError(CapwaveError):
    """A named Fourier multiplier is not in the registry."""


class ConfigError(CapwaveError):
    """Inconsistent or out-of-range run configuration."""


class QuadratureConvergenceError(CapwaveError):
    """Node doubling changed a reported integral by more than the tolerance."""
