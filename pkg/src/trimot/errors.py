"""Exception hierarchy shared by every solver."""


class TrimotError(Exception):
    """Base class for all package errors."""


class DimensionError(TrimotError, ValueError):
    """Array lengths or dimensions do not match."""


class FeasibilityError(TrimotError, ValueError):
    """A trim vector or measure violates its constraints."""


class PreconditionError(TrimotError, ValueError):
    """Input violates an operation's precondition (unsorted, ties, range)."""


class MeasureError(TrimotError, ValueError):
    """Weights do not form a probability vector."""


class DegenerateProblemError(TrimotError, ValueError):
    """Nothing to transport (for instance zero kept points)."""


class InfeasiblePlanError(TrimotError):
    """A stripe plan cannot push the uniform law onto an alpha-trimming."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level


class EnvelopeConsistencyError(TrimotError, RuntimeError):
    """Upper and lower envelopes cross; indicates a bug, never bad input."""
