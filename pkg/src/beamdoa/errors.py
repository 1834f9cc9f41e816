"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(ValueError):
    """Input is well-formed but carries no usable information (e.g. zero norm)."""


class InvalidStateError(RuntimeError):
    """An object was used out of sequence, e.g. a stale forward cache."""


class NumericFaultError(ArithmeticError):
    """A non-finite value appeared during optimisation."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration
