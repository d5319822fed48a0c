"""Exception hierarchy shared across the toolkit."""


class LungSynthError(Exception):
    """Base class for all toolkit errors."""


class NoLungFound(LungSynthError):
    """Segmentation swept every threshold without finding a plausible lung."""


class EmptyLungMask(LungSynthError):
    """An operation that samples inside the lung received an empty mask."""


class DimensionMismatch(LungSynthError):
    """Two arrays that must share a shape do not."""


class ZeroVector(LungSynthError):
    """Cosine similarity requested against a zero-norm vector."""


class SingleClass(LungSynthError):
    """Ranking metric needs both positive and negative samples."""


class NoPositives(LungSynthError):
    """Average precision needs at least one positive sample."""


class DirNotFound(LungSynthError):
    """Input directory does not exist."""


class ParseError(LungSynthError):
    """Configuration file could not be parsed; message carries line/field info."""


class UnknownKey(ParseError):
    """Configuration file contains a key the schema does not define."""
