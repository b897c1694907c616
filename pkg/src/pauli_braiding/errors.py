"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operands have incompatible sizes or qubit counts."""


class PreconditionError(ValueError):
    """An argument violates a documented precondition."""


class ValidationError(ValueError):
    """Input data (a code, a Hamiltonian, a measurement) is malformed."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResourceLimitError(RuntimeError):
    """The requested dense object or enumeration exceeds a configured limit."""


class NumericInvariantError(ArithmeticError):
    """A numerically checked invariant (PSD, completeness, idempotence) failed."""
