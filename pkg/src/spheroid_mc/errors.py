"""Exception types shared across the package."""


class SpheroidError(Exception):
    """Base class for all errors raised by spheroid_mc."""


class OverpackedSpheroid(SpheroidError, ValueError):
    """Cells occupy the whole spheroid volume (porosity would be <= 0)."""


class DomainError(SpheroidError, ValueError):
    """A special function was evaluated at a pole."""


class TruncationNotConverged(SpheroidError, RuntimeError):
    """The last retained series mode is not negligible."""


class BandwidthTooNarrow(SpheroidError, RuntimeError):
    """The frequency sweep does not cover the spectrum of the signal."""


class NegativeConcentration(SpheroidError, RuntimeError):
    """Reconstructed concentration is negative beyond the ringing tolerance."""


class SingularSystem(SpheroidError, RuntimeError):
    """A mode-matching system is numerically singular."""


class GridTooShort(SpheroidError, ValueError):
    """A time series does not cover the requested horizon."""


class MemoryTooLarge(SpheroidError, ValueError):
    """Exact ISI enumeration requested over too many symbols."""


class PresetUnknown(SpheroidError, KeyError):
    """No figure preset with the requested identifier."""


class ConfigError(SpheroidError, ValueError):
    """Invalid experiment configuration."""


class SeparationWarning(UserWarning):
    """Spheroids are too close for the far-field channel approximation."""
