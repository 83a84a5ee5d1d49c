"""Exception taxonomy for the vtalarm package.

Every error raised by the library is a subclass of ``VtalarmError`` so
callers can catch the whole family with one except clause.
"""


class VtalarmError(Exception):
    """Base class for all vtalarm errors."""


# --- WFDB ingest ---

class MalformedHeader(VtalarmError):
    """Header text is missing fields or contains non-numeric counts."""


class UnsupportedFormat(VtalarmError):
    """Storage format other than 16 or 212."""


class TruncatedData(VtalarmError):
    """Signal file byte count does not match the header."""


class ChecksumMismatch(VtalarmError):
    """Stored per-channel checksum disagrees with the decoded samples."""


class WindowOutOfBounds(VtalarmError):
    """Not enough pre/post context around the alarm to carve a window."""


class ValueOutOfRange(VtalarmError):
    """Quantized ADC value falls outside the target format's range."""


# --- preprocessing ---

class EmptyInput(VtalarmError):
    """Operation requires at least one row."""


class DimensionMismatch(VtalarmError):
    """Feature dimension disagrees with fitted parameters."""


class TooFewSamples(VtalarmError):
    """Dataset too small to split."""


# --- feature extraction ---

class TooShort(VtalarmError):
    """Signal shorter than the operation requires."""


class LengthMismatch(VtalarmError):
    """Paired channels have different lengths."""


# --- imbalance handling ---

class NotEnoughNeighbors(VtalarmError):
    """Fewer candidate points than requested neighbors."""


class MinorityTooSmall(VtalarmError):
    """Oversampling needs at least two minority samples."""


class SingleClass(VtalarmError):
    """Operation requires both classes to be present."""


# --- neural network ---

class ShapeMismatch(VtalarmError):
    """Tensor shapes do not chain."""


class DimensionNotDivisible(VtalarmError):
    """Attention model dimension not divisible by the head count."""


class InvalidHyperparams(VtalarmError):
    """Model hyperparameters fail validation."""


class BatchTooSmall(VtalarmError):
    """Train-mode batch statistics need at least two elements per feature."""


class LabelOutOfRange(VtalarmError):
    """Labels must be 0 or 1."""


class DivergedLoss(VtalarmError):
    """Training loss became non-finite."""


class CorruptCheckpoint(VtalarmError):
    """Checkpoint bytes are truncated or malformed."""


class VersionMismatch(VtalarmError):
    """Checkpoint written by an incompatible container version."""


class ArchitectureMismatch(VtalarmError):
    """Checkpoint holds a different architecture than expected."""


# --- evaluation ---

class ScoreOutOfRange(VtalarmError):
    """Alert scores must lie in [0, 1]."""


# --- pipeline / CLI ---

class MissingInput(VtalarmError):
    """A required upstream artifact is absent."""


class ConfigError(VtalarmError):
    """Pipeline configuration is invalid."""


class InvalidConfig(VtalarmError):
    """Synthetic-data configuration is invalid."""
