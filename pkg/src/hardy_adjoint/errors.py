"""Exception hierarchy shared by all modules."""


class HardyError(Exception):
    """Base class for every error raised by this package."""


class PoleError(HardyError, ZeroDivisionError):
    """Evaluation too close to a pole of a rational map."""

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class NotApplicableError(HardyError, ValueError):
    """An operation's precondition on the symbol does not hold."""


class ConditioningError(HardyError, ArithmeticError):
    """A linear system or local expansion is too ill-conditioned to trust."""


class ConsistencyError(HardyError, ArithmeticError):
    """Two quantities that must agree numerically do not."""
