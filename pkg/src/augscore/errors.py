"""Exception hierarchy shared by all augscore modules."""


class AugscoreError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------------------
# Bundle / raster errors
# ---------------------------------------------------------------------------

class MissingFile(AugscoreError):
    """A manifest or an image file referenced by it does not exist."""


class MalformedManifest(AugscoreError):
    """manifest.json is not valid JSON or violates the bundle schema."""


class DimensionMismatch(AugscoreError):
    """An image file's byte size disagrees with 2 * C * H * W."""


class MaskOutOfBounds(AugscoreError):
    """A mask rectangle does not fit inside the image extent."""


class SeriesTooShort(AugscoreError):
    """Fewer than two usable images remain in a time series."""


class RejectedEmptyBundle(AugscoreError):
    """A bundle must contain at least one time series."""


class IoFailure(AugscoreError):
    """Reading or writing bundle/report files failed at the OS level."""


# ---------------------------------------------------------------------------
# Preprocessing errors
# ---------------------------------------------------------------------------

class DegenerateChannel(AugscoreError):
    """A channel's 99th percentile is zero; quantization is undefined."""


class StatsMismatch(AugscoreError):
    """Channel statistics do not match the channel count of the data."""


# ---------------------------------------------------------------------------
# Augmentation errors
# ---------------------------------------------------------------------------

class DomainError(AugscoreError):
    """An operation received samples in the wrong numeric domain."""


# ---------------------------------------------------------------------------
# Synthetic generator errors
# ---------------------------------------------------------------------------

class InvalidParams(AugscoreError):
    """Synthetic bundle parameters violate their invariants."""


# ---------------------------------------------------------------------------
# Report errors
# ---------------------------------------------------------------------------

class MalformedCsv(AugscoreError):
    """A CSV input is empty, lacks the expected header, or fails to parse."""


class OutOfRangeMap(AugscoreError):
    """A mean-average-precision value lies outside [0, 1]."""


class UnknownTechniqueInTrainingCsv(AugscoreError):
    """A training-results row names a technique this package does not define."""
