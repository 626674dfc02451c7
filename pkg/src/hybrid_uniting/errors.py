"""Exception hierarchy shared by every module of the package."""


class HybridError(Exception):
    """Base class for all package errors."""


class InvalidConfig(HybridError, ValueError):
    """A solver or scenario configuration violates its invariants."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class InvalidParams(HybridError, ValueError):
    pass


class DimensionMismatch(HybridError, ValueError):
    pass


class NoProgress(HybridError):
    """The initial state is outside C ∪ D, so no solution can start."""


class NumericalBlowup(HybridError, ArithmeticError):
    """Flow integration produced non-finite values.

    The partially built arc (up to the last finite sample) is kept on
    ``arc`` when the solver can provide it.
    """

    def __init__(self, message, arc=None):
        super().__init__(message)
        self.arc = arc


class EmptyJumpMap(HybridError):
    pass


class MissingLyapunov(HybridError):
    pass


class BracketFailure(HybridError):
    pass


class UnboundedSublevel(HybridError):
    pass


class DomainError(HybridError, ValueError):
    pass


class DisturbanceBoundError(HybridError):
    pass
