"""Exception types shared by the LiveTV modules.

Every error carries a ``category`` which the CLI turns into an exit code.
"""


class LiveTVError(Exception):
    """Base class for all errors raised by this project."""
    category = 'error'
    exit_code = 1


class UnpaddedVolumeError(LiveTVError, ValueError):
    category = 'volume'
    exit_code = 10


class NotDyadicError(LiveTVError, ValueError):
    category = 'volume'
    exit_code = 10


class DimensionalityError(LiveTVError, ValueError):
    category = 'volume'
    exit_code = 10


class LevelRangeError(LiveTVError, ValueError):
    category = 'level'
    exit_code = 11


class WindowError(LiveTVError, ValueError):
    category = 'level'
    exit_code = 11


class PyramidStructureError(LiveTVError, ValueError):
    category = 'pyramid'
    exit_code = 12


class ShapeMismatchError(LiveTVError, ValueError):
    category = 'shape'
    exit_code = 13


class PhantomKindError(LiveTVError, ValueError):
    category = 'phantom'
    exit_code = 14


class HeaderFormatError(LiveTVError, ValueError):
    category = 'header'
    exit_code = 20


class SampleTypeError(LiveTVError, ValueError):
    category = 'sample-type'
    exit_code = 21


class PayloadSizeError(LiveTVError, ValueError):
    category = 'payload-size'
    exit_code = 22


class SliceRangeError(LiveTVError, ValueError):
    category = 'slice'
    exit_code = 23
