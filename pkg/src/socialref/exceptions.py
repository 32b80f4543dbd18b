"""Exception hierarchy shared by every solver in the package."""


class SocialRefError(Exception):
    """Base class for all package errors."""


class ParameterError(SocialRefError, ValueError):
    """An input violates a documented precondition."""


class ExistenceError(SocialRefError, ValueError):
    """The equilibrium (or resolvent) does not exist for these inputs."""


class ConvergenceError(SocialRefError, RuntimeError):
    """An iterative solver ran out of iterations.

    Attributes
    ----------
    residual : float
        Last observed residual (sup-norm of the update, or equation residual).
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class BoundViolationError(SocialRefError, RuntimeError):
    """A scalar root left the interval it is guaranteed to lie in."""


class InfeasibleModelError(SocialRefError, ValueError):
    """The model admits no solution on the admissible bracket."""


class RankDeficientError(SocialRefError, ValueError):
    """Design matrix is (numerically) rank deficient."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)
