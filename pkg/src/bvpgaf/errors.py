"""Exception hierarchy shared by every pipeline stage."""


class BvpError(Exception):
    """Base class for all errors raised by bvpgaf."""


class FormatError(BvpError):
    """A text input does not follow its expected layout."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TruncationError(FormatError):
    """Input ended before all required header lines were read."""


class EmptySeriesError(BvpError):
    """A time series with zero samples was constructed or parsed."""


class ManifestError(BvpError):
    """A session manifest row is invalid."""


class ParameterError(BvpError, ValueError):
    """An argument is outside its valid range."""


class EmptyWindowSetError(BvpError):
    """Segmentation produced no windows at all."""


class DomainError(BvpError, ValueError):
    """A value lies outside the mathematical domain of an operation."""


class DegenerateInputError(BvpError):
    """Input is degenerate for the requested statistic (e.g. constant)."""


class DataError(BvpError):
    """A dataset lacks the groups or observations an analysis needs."""


class ShapeError(BvpError, ValueError):
    """Tensor shape does not match what a layer expects."""


class SplitError(BvpError):
    """A train/validation/test split cannot satisfy its constraints."""


class DivergenceError(BvpError):
    """Training produced a non-finite loss.

    ``partial_report`` holds the epochs completed before the failure.
    """

    def __init__(self, message, batch_index=None, partial_report=None):
        self.batch_index = batch_index
        self.partial_report = partial_report
        super().__init__(message)


class ContainerError(BvpError):
    """A binary tensor container is corrupt or of an unknown version."""
