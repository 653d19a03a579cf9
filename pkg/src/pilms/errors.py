"""Exception types raised across the package."""


class PilmsError(Exception):
    """Base class for package errors."""


class InvalidObservableError(PilmsError, ValueError):
    """Operator is not a valid Hermitian observable or density matrix."""


class RankDeficientError(PilmsError, ArithmeticError):
    """A generated basis failed its linear-independence check."""

    def __init__(self, message, *, d=None, n=None, scheme=None, rank=None, size=None):
        super().__init__(message)
        self.d = d
        self.n = n
        self.scheme = scheme
        self.rank = rank
        self.size = size


class DecompositionRejected(PilmsError, ArithmeticError):
    """Reconstruction residual exceeded the acceptance threshold."""

    def __init__(self, message, *, residual=None, condition=None):
        super().__init__(message)
        self.residual = residual
        self.condition = condition


class ParameterRangeError(PilmsError, ValueError):
    """Planner or channel parameter outside its allowed range."""


class MissingDataError(PilmsError, ValueError):
    """Measurement data does not cover the plan."""
