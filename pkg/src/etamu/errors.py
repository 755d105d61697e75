"""Exception types raised by the numerical kernels."""


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class PoleProximityError(DomainError):
    """A Gamma-ratio expression was evaluated too close to one of its poles."""


class ConvergenceError(ArithmeticError):
    """A series or quadrature did not reach its tolerance.

    The best available estimate is attached as ``partial`` so callers can
    decide whether to use it.
    """

    def __init__(self, message, partial=None, error=None):
        super().__init__(message)
        self.partial = partial
        self.error = error


class AccuracyError(ArithmeticError):
    """A result failed a post-hoc accuracy check (e.g. a CDF outside [0, 1])."""
