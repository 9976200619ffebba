"""Exception hierarchy shared by all retrobleu modules."""


class RetroBleuError(Exception):
    """Base class for all errors raised by this package."""


class MalformedJsonError(RetroBleuError):
    """The input is not valid JSON or a value has the wrong JSON type."""


class MissingFieldError(RetroBleuError):
    """A required field is absent or empty."""


class AlternationViolationError(RetroBleuError):
    """Molecule/reaction node kinds do not strictly alternate."""


class EmptyRouteError(RetroBleuError):
    """The route contains no reactions."""


class MissingTokenError(RetroBleuError):
    """A reaction node lacks the token kind requested for extraction."""


class MixedRadiusError(RetroBleuError):
    """Template tokens declare inconsistent extraction radii."""


class ArityMismatchError(RetroBleuError):
    """The n-gram orders of two operands disagree."""


class KindMismatchError(RetroBleuError):
    """The token kinds of two operands disagree."""


class ProbOutOfRangeError(RetroBleuError):
    """A reaction probability is outside (0, 1]."""


class BadMagicError(RetroBleuError):
    """A database file does not start with the expected magic string."""


class VersionMismatchError(RetroBleuError):
    """A database file declares an unsupported format version."""


class CorruptRecordError(RetroBleuError):
    """A database file contains a malformed record.

    :param line_number: 1-based line number of the offending record
    """

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyInputError(RetroBleuError):
    """An aggregate operation received no input."""
