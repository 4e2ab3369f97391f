"""Exception hierarchy shared by all modules."""


class EikonalError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(EikonalError, ValueError):
    pass


class ParseError(EikonalError, ValueError):
    """Syntax error in generating-function text, with a 1-based position."""

    def __init__(self, message, line=1, column=1):
        self.line = line
        self.column = column
        super().__init__(f"{message} (line {line}, column {column})")


class UnknownIdentifierError(ParseError):
    pass


class PoleError(EikonalError, ArithmeticError):
    """A denominator vanished during evaluation."""

    def __init__(self, subexpression, message=None):
        self.subexpression = subexpression
        super().__init__(message or f"pole: denominator {subexpression} vanishes")


class NotPolynomializableError(EikonalError):
    """The expression is not rational in G (callers fall back to Newton)."""


class NoRootsError(EikonalError):
    pass


class IdenticallyZeroError(EikonalError):
    pass


class PreconditionError(EikonalError, ValueError):
    pass


class SingularPointError(EikonalError):
    pass


class DegenerateSolutionError(EikonalError):
    pass


class InsufficientStencilError(EikonalError):
    pass


class StationaryPointError(EikonalError):
    pass


class NotEikonalError(EikonalError):
    pass


class NoRayFoundError(EikonalError):
    pass


class InconclusiveError(EikonalError):
    pass
