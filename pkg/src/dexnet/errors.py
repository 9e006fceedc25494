"""Exception hierarchy shared across dexnet."""


class DexnetError(Exception):
    """Base class for all dexnet errors."""


class InvalidSegmentationError(DexnetError, ValueError):
    pass


class OutOfRangeError(DexnetError, ValueError):
    pass


class IngestError(DexnetError):
    """Raised when an input stream exceeds its error budget."""


class DecodeError(DexnetError):
    """An RPC response could not be decoded as the expected ABI value."""

    def __init__(self, call, message):
        super().__init__(f"{call}: {message}")
        self.call = call


class RpcTransportError(DexnetError):
    pass


class UndefinedMetricError(DexnetError, ValueError):
    """A metric was requested on a graph for which it is not defined."""


class NotConnectedError(DexnetError, ValueError):
    pass


class EmptySeriesError(DexnetError, ValueError):
    pass


class InsufficientDataError(DexnetError, ValueError):
    pass


class DegenerateFitError(DexnetError, ValueError):
    pass


class InvalidAssignmentError(DexnetError, ValueError):
    pass


class AttributeMismatchError(DexnetError, ValueError):
    pass
