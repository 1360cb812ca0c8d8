"""Exception types shared across the package."""


class ShapeError(ValueError):
    """Array extents or channel counts do not match what an operation needs."""


class ParameterError(ValueError):
    """A parameter is outside its valid range (bad thresholds, negative radius...)."""


class DomainError(ValueError):
    """The requested quantity is mathematically undefined for this input."""


class DegenerateMaskError(DomainError):
    """A morphological operation emptied the mask."""


class NoOverlapError(DomainError):
    """No segment overlaps the target mask."""


class PlacementError(ValueError):
    """An object placement left no mask pixels inside the frame."""


class GenerationError(RuntimeError):
    """Synthetic data generation could not satisfy its contract."""


class ConfigError(ValueError):
    """An experiment or CLI configuration is invalid."""


class DataError(RuntimeError):
    """Input data is missing or malformed."""


class SweepError(RuntimeError):
    """A sweep could not produce any usable condition/sample combination."""
