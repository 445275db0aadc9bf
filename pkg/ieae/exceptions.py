class IeaeError(Exception):
    """Base class for all errors raised by `ieae`."""

    exit_code: int = 1


class InternalError(IeaeError):
    """An internal error occurred."""


class InvalidArgument(IeaeError):
    """An argument is outside the domain of the operation."""


class KeyDomainError(IeaeError):
    """A secret-key parameter is outside its allowed range."""


class LayoutError(IeaeError):
    """Image, block or mask dimensions do not fit together."""


class InsufficientDataError(IeaeError):
    """The time series is too short for the requested estimate."""


class DegenerateDistanceError(IeaeError):
    """Phase-space points coincide, so no separation can be measured."""


class ReplacementFailure(IeaeError):
    """No neighbour satisfies the angle constraint."""


class FormatError(IeaeError):
    """A file could not be parsed."""

    exit_code = 2
