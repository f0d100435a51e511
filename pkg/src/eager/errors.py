"""Exception types shared across the package."""


class EagerError(Exception):
    """Base class for all errors raised by eager."""


class InputError(EagerError, ValueError):
    """Malformed or inconsistent user-supplied input."""


class ParseError(InputError):
    """A line of a dataset file could not be parsed.

    Attributes
    ----------
    path : str or None
        File being parsed, when known.
    lineno : int
        1-based line number of the offending line.
    """

    def __init__(self, message, lineno, path=None):
        self.path = path
        self.lineno = lineno
        where = f"{path}:{lineno}" if path is not None else f"line {lineno}"
        super().__init__(f"{where}: {message}")


class NegativeSamplingError(EagerError, RuntimeError):
    """The candidate pool cannot supply the requested number of negatives."""


class TrainingError(EagerError, RuntimeError):
    """Model training diverged or was started on unusable data."""
