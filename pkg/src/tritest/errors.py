"""Exception types shared across the package."""


class TritestError(Exception):
    """Base class for every error this package raises deliberately."""


class ValidationError(TritestError, ValueError):
    """An input violates a documented contract (domain, shape, or schema)."""


class ConfigurationError(TritestError, ValueError):
    """Components are wired together inconsistently (e.g. plan vs. stage tests)."""


class ParseError(ValidationError):
    """A data file could not be parsed.

    Carries the 1-based line number of the offending row when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
