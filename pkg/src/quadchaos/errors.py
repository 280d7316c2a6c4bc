"""Exception hierarchy.

Every error raised on purpose by this package derives from
:class:`QuadChaosError`. The CLI maps :class:`DomainError` (and its
subclasses) to exit code 2 and :class:`NumericalError` to exit code 3.
"""


class QuadChaosError(Exception):
    pass


class DomainError(QuadChaosError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class DimensionError(DomainError):
    """Matrix input with the wrong shape."""


class InvalidValueError(DomainError):
    """NaN or infinite entries."""


class NumericalError(QuadChaosError, ArithmeticError):
    """A numerical procedure could not produce a trustworthy result."""


class ConvergenceError(NumericalError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
