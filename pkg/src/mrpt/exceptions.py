"""Exception types raised by the mrpt package."""


class MRPTError(Exception):
    """Base class for all mrpt errors."""


class ParameterError(MRPTError):
    """A parameter is outside its allowed range."""


class ShapeError(MRPTError):
    """Array dimensions do not match what an operation requires."""


class DepthError(ParameterError):
    """Requested tree depth is invalid for the dataset size."""


class IntegrityError(MRPTError):
    """Internal data references are inconsistent (e.g. out-of-range point index)."""


class FormatError(MRPTError):
    """A file is malformed, truncated, or of an unsupported version."""


class ChecksumMismatchError(MRPTError):
    """A stored index does not belong to the supplied dataset."""
