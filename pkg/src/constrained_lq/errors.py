"""Exception hierarchy shared across the package."""


class ConstrainedLQError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(ConstrainedLQError, ValueError):
    pass


class EmptyInput(ConstrainedLQError, ValueError):
    pass


class NotSymmetric(ConstrainedLQError, ValueError):
    pass


class NotPositiveDefinite(ConstrainedLQError, ArithmeticError):
    pass


class NotPSD(ConstrainedLQError, ArithmeticError):
    pass


class DegenerateConstraint(ConstrainedLQError, ArithmeticError):
    pass


class NonFiniteRecursion(ConstrainedLQError, ArithmeticError):
    pass


class NonFiniteState(ConstrainedLQError, ArithmeticError):
    pass


class SingularKKT(ConstrainedLQError, ArithmeticError):
    pass


class InvalidWindow(ConstrainedLQError, ValueError):
    pass


class IndexOutOfRange(ConstrainedLQError, IndexError):
    pass


class ConfigParseError(ConstrainedLQError, ValueError):
    """Raised for unreadable or malformed scenario files.

    ``field`` holds the dotted path of the offending key when known and
    ``line`` the 1-based line number for syntax errors.
    """

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(ConstrainedLQError, ValueError):
    """A parsed scenario violates a model invariant."""

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(f"{invariant}: {message}")
