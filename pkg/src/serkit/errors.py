"""Exception types raised by the toolkit's public operations."""


class SerkitError(Exception):
    """Base class for all toolkit errors."""


# -- audio decoding / conditioning ------------------------------------------

class MalformedContainer(SerkitError):
    """The file is not a well-formed RIFF/WAVE container."""


class UnsupportedEncoding(SerkitError):
    """The WAV payload is not 16-bit integer PCM."""


class EmptyAudio(SerkitError):
    """The WAV data chunk holds zero samples."""


class WrongRate(SerkitError):
    """A conditioned-pipeline operation received the wrong sample rate."""


# -- DSP ---------------------------------------------------------------------

class UnsupportedFrameLength(SerkitError):
    """Frame length outside the supported analysis resolutions."""


class NotPowerOfTwo(SerkitError):
    """FFT size must be a power of two."""


class BadBand(SerkitError):
    """Filterbank band edges are inverted or empty."""


# -- functionals -------------------------------------------------------------

class TooFewFrames(SerkitError):
    """Functional statistics need at least two frames."""


class DimensionMismatch(SerkitError):
    """Imported feature vectors do not have the expected width."""


class NonNumericCell(SerkitError):
    """A feature CSV body cell failed to parse as a number."""


# -- network engine ----------------------------------------------------------

class ShapeMismatch(SerkitError):
    """Tensor shapes do not agree for the requested operation."""


class BatchTooSmall(SerkitError):
    """Batch normalization needs at least two rows in train mode."""


class LabelOutOfRange(SerkitError):
    """A class label falls outside [0, num_classes)."""


class IncompatibleShape(SerkitError):
    """Model input shape does not match the model kind."""


class DegenerateLabels(SerkitError):
    """Classifier training needs at least two distinct classes."""


# -- harness -----------------------------------------------------------------

class UnknownLabel(SerkitError):
    """Manifest row carries a label outside the emotion inventory."""


class MissingFile(SerkitError):
    """Manifest references a file that does not exist."""


class EmptyManifest(SerkitError):
    """No usable entries remain after filtering."""


class DuplicatePath(SerkitError):
    """The same clip path appears more than once in a manifest."""


class ClassTooSmall(SerkitError):
    """A class has too few entries to split."""


class LengthMismatch(SerkitError):
    """Truth and prediction vectors differ in length."""


class FeatureMissing(SerkitError):
    """No features available for a manifest entry."""


class ConfigInvalid(SerkitError):
    """A run or grid configuration failed validation."""
