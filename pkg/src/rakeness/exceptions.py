"""Exception hierarchy shared by every module of the package."""


class RakenessError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(RakenessError, ValueError):
    """Input array or parameter violates a documented precondition."""


class DomainError(RakenessError, ValueError):
    """Argument lies outside the mathematical domain of a function."""


class InfeasibleError(RakenessError):
    """Optimization problem has an empty feasible set.

    Attributes
    ----------
    bound : float or None
        The smallest admissible value of the offending parameter, when known
        (minimum achievable quadratic value, ``r_min(c)``, ``1/n`` ...).
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class NumericError(RakenessError, ArithmeticError):
    """Iterative computation failed to converge or produced non-finite values."""


class SizeError(RakenessError, ValueError):
    """Request exceeds a combinatorial size guard."""
