"""Exceptions shared across the package."""


class ValidationError(ValueError):
    """Raised when an input fails a precondition (bad matrix, bad flag, ...)."""


class BudgetExceededError(RuntimeError):
    """Raised when an exact-enumeration path would exceed its configured budget.

    Exhaustive paths refuse instead of silently truncating.
    """
