"""Exception types raised across the toolkit."""


class DocbinError(Exception):
    """Base class for all toolkit errors."""


class InvalidParams(DocbinError, ValueError):
    pass


class UnsupportedFormat(DocbinError):
    pass


class CorruptImage(DocbinError):
    pass


class DegenerateHistogram(DocbinError):
    """Histogram has too few populated bins to place the requested thresholds."""


class RegionOutOfBounds(DocbinError, ValueError):
    pass


class DimensionMismatch(DocbinError, ValueError):
    pass


class EmptyGroundTruth(DocbinError, ValueError):
    pass


class UndefinedDistortion(DocbinError, ValueError):
    """DRD requested on a ground truth with no non-uniform 8x8 block."""


class EmptyTable(DocbinError, ValueError):
    pass
