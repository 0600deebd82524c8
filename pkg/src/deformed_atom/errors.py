"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the region where the model is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to reach its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class ConsistencyError(RuntimeError):
    """Two independent evaluations of the same quantity disagree."""


class IntegrationError(RuntimeError):
    """Trajectory integration stopped early; ``last_state`` holds the last good point."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state


class DegenerateModeError(ValueError):
    """Two normal-mode frequencies coincide, so eigenvectors are not unique."""
