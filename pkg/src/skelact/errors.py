"""Exception hierarchy for the skelact pipeline.

Errors are grouped so the CLI can map them to exit codes: configuration
and usage problems exit 1, data/input problems exit 2, anything else 3.
"""


class SkelactError(Exception):
    """Base class for all skelact errors."""


# --- configuration / usage ---------------------------------------------------

class ConfigError(SkelactError):
    """Invalid, unknown, or ill-typed configuration value."""


# --- data / input ------------------------------------------------------------

class DataError(SkelactError):
    """Base class for malformed or inconsistent input data."""


class SchemaError(DataError):
    """Pose JSON document violates the documented schema."""


class EmptyClipError(DataError):
    """Clip contains no frames."""


class MissingActorError(DataError):
    """No actor pose available in a sampled frame."""


class IndexOutOfRange(DataError):
    """Requested frame index does not exist in the clip."""


class ZeroExtentError(DataError):
    """Coordinate normalization called with non-positive extent."""


class TooFewFramesError(DataError):
    """Segment count exceeds the number of frames."""


class NoPersonError(DataError):
    """Frame holds no poses to select an actor from."""


class StrategyError(DataError):
    """Object-connection strategy not applicable (e.g. human-only)."""


class DegeneratePoseError(DataError):
    """All joints missing; gravity center undefined."""


class EmptyFrameError(DataError):
    """Image frame has zero pixels."""


class DimensionMismatch(DataError):
    """Image / mask dimensions disagree."""


class ShapeMismatch(DataError):
    """Tensor or matrix shapes are incompatible."""


class NoTrackError(DataError):
    """No tracks available to pick a primary actor from."""


class EmptyDatasetError(DataError):
    """Evaluation dataset is empty."""


class IoError(DataError):
    """File could not be read or written."""


class VersionError(DataError):
    """Checkpoint format version is not supported."""


class CorruptionError(DataError):
    """Checkpoint failed its integrity check."""
