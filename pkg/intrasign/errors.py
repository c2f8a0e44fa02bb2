"""Exceptions raised by intrasign.

Validation problems (bad input files, bad shapes, too little data) derive from
``ValidationError`` which is also a ``ValueError``. The CLI maps them, together
with ``ConfigurationError``, to exit code 1.
"""

from typing import Optional


class IntrasignError(Exception):
    """Base class for all intrasign errors."""


class ValidationError(IntrasignError, ValueError):
    pass


class ParseError(ValidationError):
    """A record in an input file could not be parsed."""

    def __init__(self, message: str, line: Optional[int] = None, path=None):
        self.line = line
        self.path = path
        location = ""
        if path is not None:
            location = f"{path}"
        if line is not None:
            location = f"{location}:{line}" if location else f"line {line}"
        super().__init__(f"{location}: {message}" if location else message)


class OrderingError(ValidationError):
    pass


class SchemaError(ValidationError):
    pass


class SizeError(ValidationError):
    pass


class StructureError(ValidationError):
    """Shapes or lengths of paired inputs disagree."""


class ConfigurationError(IntrasignError):
    pass


class RunFailure(IntrasignError):
    """One (ticker, run) job failed; the whole stock is aborted."""

    def __init__(self, ticker: str, run: int, cause: BaseException):
        self.ticker = ticker
        self.run = run
        self.cause = cause
        super().__init__(f"run {run} of {ticker} failed: {cause!r}")

    # raised inside worker processes, so it has to survive pickling
    def __reduce__(self):
        return (self.__class__, (self.ticker, self.run, self.cause))
