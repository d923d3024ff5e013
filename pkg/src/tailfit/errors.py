"""Exception hierarchy shared by all tailfit modules."""


class TailfitError(Exception):
    """Base class for every error raised by tailfit."""


class DomainError(TailfitError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConfigurationError(TailfitError, ValueError):
    """A configuration cannot produce a valid computation (e.g. too few rows)."""


class NumericError(TailfitError, ArithmeticError):
    """A computation hit a degenerate value (log of a nonpositive number, 0/0, ...)."""


class SingularMatrixError(NumericError):
    """A symmetric solve met a zero pivot or an excessive condition estimate."""

    def __init__(self, message: str, condition_estimate: float = float("inf")):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class IllConditionedError(SingularMatrixError):
    """The weighted normal equations are numerically singular."""


class ConditionMError(SingularMatrixError):
    """The limit matrix M(a, b, R) is not (numerically) invertible."""
