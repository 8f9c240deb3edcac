"""Exception types shared across modules."""


class ResourceBudgetError(RuntimeError):
    """A requested Hilbert-space dimension exceeds the configured budget."""

    def __init__(self, requested, budget):
        self.requested = requested
        self.budget = budget
        super().__init__(f"dimension {requested} exceeds budget {budget}")


class NumericalValidationError(RuntimeError):
    """A computed residual is above the tolerance it was checked against."""

    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class CutoffError(NumericalValidationError):
    """Fock-space truncation is too small for the requested state."""
