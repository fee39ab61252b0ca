"""Exception types shared across the package."""


class DictPRError(Exception):
    """Base class for all package errors."""


class InvalidParameter(DictPRError, ValueError):
    """An argument is out of range or has mismatched dimensions."""


class DegenerateInput(DictPRError, ValueError):
    """The input makes the requested quantity undefined (e.g. a zero matrix in a ratio)."""


class PreconditionViolation(DictPRError, ValueError):
    """A documented precondition does not hold (e.g. a recovery condition is false)."""


class NumericFailure(DictPRError, ArithmeticError):
    """An iterative numerical routine failed to converge."""
