"""Exception types shared across the pipeline."""


class ThermocadError(Exception):
    """Base class for all pipeline-specific errors."""


class ImageFormatError(ThermocadError):
    """Unreadable or unsupported image file (bad magic, bit depth, mode...)."""


class EmptyRoiError(ThermocadError):
    """A mask leaves no usable pixels (or no runs) inside the region of interest."""


class EmptyPairsError(ThermocadError):
    """An offset yields no valid co-occurring pixel pair."""


class NormalizationError(ThermocadError):
    """A co-occurrence matrix with zero total count cannot be normalized."""


class ConvergenceError(ThermocadError):
    """SMO failed to reach the KKT tolerance within the iteration cap."""


class CrossValidationError(ThermocadError):
    """A cross-validation fold could not be trained or scored."""
