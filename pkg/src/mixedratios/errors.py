"""Exception types shared across the package.

The CLI maps :class:`ValidationError` to exit code 2 and
:class:`NumericalGuardError` to exit code 3.
"""


class ValidationError(ValueError):
    """An input violates a documented precondition."""


class NumericalGuardError(ArithmeticError):
    """A numerical safety guard fired (separation, pole proximity, non-finite values)."""
