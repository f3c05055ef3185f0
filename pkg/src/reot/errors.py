"""Exception hierarchy shared by all reot modules."""


class ReotError(Exception):
    """Base class for every error raised by reot."""


class DomainError(ReotError, ValueError):
    """An argument lies outside the domain of the operation."""


class InfiniteMomentError(ReotError, ValueError):
    """A requested moment does not exist for the distribution."""


class StructuralError(ReotError, ValueError):
    """Inconsistent shapes, grids or index maps."""


class PreconditionError(ReotError, ValueError):
    """A mathematical precondition (e.g. stochastic dominance) fails."""


class InfeasibleError(ReotError):
    """The optimization problem admits no feasible point."""


class ConvergenceError(ReotError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals or {}


class ConfigError(ReotError, ValueError):
    """Invalid run configuration."""
