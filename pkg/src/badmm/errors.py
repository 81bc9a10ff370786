"""Exception types shared across the package."""


class BadmmError(Exception):
    """Base class for every error raised by this library."""


class InvalidParameter(BadmmError):
    """An argument is outside its documented range or not finite."""


class InvalidBracket(BadmmError):
    """A search bracket (lo, hi) does not satisfy lo < hi."""


class NotSpd(BadmmError):
    """A matrix required to be symmetric positive definite is not."""


class NoConvergence(BadmmError):
    """An iterative kernel (eigen/singular solver) failed to converge."""


class DomainViolation(BadmmError):
    """A point lies outside the domain of a Bregman generator."""


class ConvexityViolation(BadmmError):
    """A generator parameterization is not convex (mu <= alpha*||B||^2)."""


class DimensionMismatch(BadmmError):
    """Vector/matrix shapes are inconsistent with the bound problem."""


class StrategyMismatch(BadmmError):
    """A subproblem strategy was applied to a problem it does not fit."""


class SubproblemFailure(BadmmError):
    """A solver step could not produce a minimizer."""


class UsageError(BadmmError):
    """Bad command line or configuration input."""


class IoError(BadmmError):
    """Reading or writing an output artifact failed."""
