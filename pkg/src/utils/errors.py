"""
Error types for the fall detection toolkit.

Every error is a ValueError so callers that only care about "bad input"
can catch one type; the subclasses carry the context needed for messages.
"""

from typing import Optional


class DatasetError(ValueError):
    """Base class for dataset loading and validation failures."""


class CanonicalParseError(DatasetError):
    """A canonical dataset file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LengthMismatchError(DatasetError):
    """A record's axes (or the record itself) have the wrong length."""

    def __init__(self, message: str, record_id: Optional[str] = None):
        self.record_id = record_id
        if record_id is not None:
            message = f"record '{record_id}': {message}"
        super().__init__(message)


class UnknownLabelError(DatasetError):
    """A label could not be mapped to ADL or FALL."""


class SplitError(ValueError):
    """Invalid split specification or fold index."""


class WaveletError(ValueError):
    """Unknown or untabulated wavelet family, or invalid wavelet parameters."""


class FeatureConfigError(ValueError):
    """Invalid feature configuration."""


class DimensionMismatchError(ValueError):
    """Query vector dimension differs from the training vectors."""


class ModelError(ValueError):
    """Invalid model parameters or training data."""


class ModelFormatError(ModelError):
    """A serialized model file is corrupt or of an unsupported version."""


class ConfigurationError(ValueError):
    """Inconsistent runtime configuration (e.g. model/window mismatch)."""


class FoldError(ValueError):
    """An error raised while running one evaluation fold."""

    def __init__(self, fold_index: int, cause: Exception):
        self.fold_index = fold_index
        self.cause = cause
        super().__init__(f"fold {fold_index}: {cause}")
