"""Exception taxonomy shared across the catalog, language, planner, engine and agent."""

from __future__ import annotations


class SkyqlError(Exception):
    """Base class for all errors raised by this package."""


# -- catalog / schema ---------------------------------------------------------

class UnknownClass(SkyqlError):
    pass


class UnknownMember(SkyqlError):
    pass


class NotALink(SkyqlError):
    pass


class WrongKind(SkyqlError):
    pass


class IndexOutOfRange(SkyqlError):
    pass


class IoError(SkyqlError):
    pass


class SchemaMismatch(SkyqlError):
    pass


class MalformedRow(SkyqlError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


# -- language -----------------------------------------------------------------

class SyntaxError_(SkyqlError):
    """SXQL syntax error with position and the token set that was expected."""

    def __init__(self, message: str, line: int, col: int, expected: tuple[str, ...] = ()):
        loc = f"{line}:{col}: {message}"
        if expected:
            loc += " (expected " + ", ".join(expected) + ")"
        super().__init__(loc)
        self.line = line
        self.col = col
        self.expected = expected


class UnknownMacro(SkyqlError):
    pass


class UnknownFlagConstant(SkyqlError):
    pass


class TypeError_(SkyqlError):
    pass


class BadQuantifier(SkyqlError):
    pass


# -- index --------------------------------------------------------------------

class UnindexedBand(SkyqlError):
    pass


# -- planner ------------------------------------------------------------------

class UnsupportedShape(SkyqlError):
    pass


class UnmappedDatabase(SkyqlError):
    pass


# -- engine -------------------------------------------------------------------

class EvalError(SkyqlError):
    """Predicate/extraction evaluation failure, scoped to one query, never fatal."""

    DIVIDE_BY_ZERO = "DivideByZero"
    DOMAIN_ERROR = "DomainError"
    OVERFLOW = "Overflow"

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code


class Cancelled(SkyqlError):
    pass


# -- agent --------------------------------------------------------------------

class AuthFailed(SkyqlError):
    pass


class TooManySessions(SkyqlError):
    pass


class UnknownQuery(SkyqlError):
    pass


class IllegalState(SkyqlError):
    pass


class PartitionUnavailable(SkyqlError):
    pass
