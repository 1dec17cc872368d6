"""Exception types raised by the engine.

Everything derives from :class:`NPCloudError`, so callers (and the CLI exit
code mapping) can catch one base class for all data/contract failures.
"""


class NPCloudError(Exception):
    """Base class for all package-specific errors."""


# --- core ---------------------------------------------------------------

class EmptyCloud(NPCloudError):
    """A point cloud with zero points was supplied."""


class NonFiniteInput(NPCloudError):
    """Coordinates contain NaN or Inf."""


# --- geom ---------------------------------------------------------------

class BadCount(NPCloudError):
    """Requested sample count outside [1, N]."""


class BadK(NPCloudError):
    """Neighbor count k < 1."""


class EmptyCoarse(NPCloudError):
    """Interpolation source point set is empty."""


# --- encoding -----------------------------------------------------------

class DimOverflow(NPCloudError):
    """Requested encoding width exceeds the available channel count."""


class SplitMismatch(NPCloudError):
    """Fourier/adaptive channel split does not add up to the target width."""


class ShapeMismatch(NPCloudError):
    """Two arrays that must share a shape do not."""


# --- encoder ------------------------------------------------------------

class TooFewPoints(NPCloudError):
    """Cloud has fewer points than the pipeline or loader requires."""


# --- inference ----------------------------------------------------------

class EmptyTrainingSet(NPCloudError):
    """Bank construction received no shapes."""


class ClassOutOfRange(NPCloudError):
    """A class id is missing or outside [0, C)."""


class DimMismatch(NPCloudError):
    """Query descriptor width differs from the bank's."""


class UnknownCategory(NPCloudError):
    """Category id absent from the bank / category table."""


class InsufficientPool(NPCloudError):
    """Episode sampling needs more classes or more shapes per class."""


# --- io -----------------------------------------------------------------

class ParseError(NPCloudError):
    """Malformed sample file; message carries the line number or byte offset."""


class ConfigHashMismatch(NPCloudError):
    """Bank was built under a different encoder configuration."""


class CorruptBank(NPCloudError):
    """Bank file failed magic/version/checksum validation."""


class ManifestError(NPCloudError):
    """Dataset manifest is inconsistent or references missing files."""
