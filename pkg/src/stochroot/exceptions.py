"""Exception hierarchy used across the package."""


class StochRootError(Exception):
    """Base class for all package errors."""


class ShapeError(StochRootError, ValueError):
    """Operands have incompatible or non-square shapes."""


class ValidationError(StochRootError, ValueError):
    """Input fails a structural check (stochasticity, positivity, ...)."""


class ZeroDivisorError(StochRootError, ZeroDivisionError):
    """Entrywise division by an exactly zero entry."""


class NotConvergedError(StochRootError):
    """An iterative procedure did not reach its tolerance."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class NonPositiveError(StochRootError, ValueError):
    """A vector or matrix that must be strictly positive is not."""


class ReducibleChainError(NonPositiveError):
    """The stationary distribution has non-positive entries (reducible chain)."""


class NonPositiveInputError(NonPositiveError):
    """Sinkhorn balancing received a matrix with non-positive entries."""


class RetractionOverflowError(StochRootError, FloatingPointError):
    """Exponential retraction exponent too large; the step must shrink."""


class StepTooLargeError(StochRootError):
    """Linear retraction left the positive orthant."""


class SolverFailure(StochRootError):
    """A linear solver failed."""


class BreakdownNullStartError(SolverFailure):
    """Initial residual lies entirely in the null space of the system."""


class SingularFactorizationError(SolverFailure):
    """Dense factorization of a supposedly nonsingular matrix failed."""


class PivotFailure(SolverFailure):
    """Incomplete Cholesky met a non-positive pivot."""


class LineSearchFailure(StochRootError):
    """Backtracking could not find a sufficient decrease."""


class InvalidSpecError(StochRootError, ValueError):
    """Generator specification is malformed."""
