"""Exception hierarchy."""


class RSSError(Exception):
    """Base class for errors raised by rssinfer."""


class ArgumentError(RSSError, ValueError):
    """An argument is outside the documented range."""


class DomainError(ArgumentError):
    """A function was evaluated where it is not defined (e.g. a weight at p = 0)."""


class EstimatorUndefinedError(RSSError):
    """The requested estimator does not exist for this dataset."""


class ParseError(RSSError, ValueError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)
