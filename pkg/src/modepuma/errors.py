"""Exception hierarchy shared across the toolkit."""


class ValidationError(ValueError):
    """Input violates a documented precondition or type invariant."""


class DimensionError(ValidationError):
    """Matrix/vector dimensions are incompatible with the operation."""


class SingularityError(ArithmeticError):
    """A matrix that must be invertible is numerically singular."""


class NumericalError(ArithmeticError):
    """An iterative numerical procedure failed to produce a usable result."""
