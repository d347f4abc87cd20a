"""Exception types shared across the library."""


class EmstError(Exception):
    """Base class for every error raised by this package."""


class EmptyDatasetError(EmstError):
    """An operation received zero points."""


class InvalidCoordinateError(EmstError):
    """A coordinate was NaN or infinite."""


class DimensionMismatchError(EmstError):
    """Two geometric arguments disagree on dimension."""


class UnsupportedDimensionError(EmstError):
    """Point dimension outside {2, 3}."""


class InvalidParameterError(EmstError):
    """A parameter violates its documented range."""


class InvalidIndexError(EmstError):
    """A point index is out of range for the dataset."""


class ParseError(EmstError):
    """A dataset or edge file could not be parsed.

    Carries the 1-based line number when one is known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OracleCapError(EmstError):
    """Brute-force oracle asked to exceed its configured size cap."""


class NoOutgoingEdgeError(EmstError):
    """A component has no points outside it."""


class NothingToFindError(EmstError):
    """Outgoing-edge search invoked with a single live component."""


class TraversalStackOverflowError(EmstError):
    """Internal diagnostic: fixed-capacity traversal stack overflowed."""


class InternalInvariantViolation(EmstError):
    """Internal diagnostic: a structural assertion failed."""
