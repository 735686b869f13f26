"""Exception types raised across the package."""


class HypdotError(Exception):
    """Base class for all package errors."""


class DomainError(HypdotError, ValueError):
    """Argument outside the domain of a function (poles, cuts, excluded parameters)."""


class RangeError(HypdotError, OverflowError):
    """Result not representable in double precision."""


class ConvergenceError(HypdotError, RuntimeError):
    """Iterative procedure failed to converge.

    ``residual`` holds the last residual seen, ``trace`` optional iterates.
    """

    def __init__(self, message, residual=None, trace=None):
        super().__init__(message)
        self.residual = residual
        self.trace = trace


class AccuracyError(HypdotError, RuntimeError):
    """A truncated series or table did not reach the requested accuracy."""


class PoleError(HypdotError, ArithmeticError):
    """Evaluation at (or numerically on top of) a pole.

    ``location`` is the offending spectral parameter, ``channel`` the partial
    wave when meaningful.
    """

    def __init__(self, message, location=None, channel=None):
        super().__init__(message)
        self.location = location
        self.channel = channel
