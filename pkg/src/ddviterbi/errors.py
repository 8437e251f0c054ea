"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A numeric parameter is outside its valid range."""


class InvalidScenarioError(ValueError):
    """Constellation, noise family, or detector combination is inconsistent."""


class TabulationError(RuntimeError):
    """Numerical quadrature failed to produce a reliable density table."""


class NoValidPathError(RuntimeError):
    """Every trellis state was assigned infinite cost at some step."""


class TrainingDivergedError(RuntimeError):
    """Training loss became non-finite."""

    def __init__(self, epoch, message=None):
        self.epoch = epoch
        super().__init__(message or f"non-finite training loss at epoch {epoch}")


class FitFailureError(RuntimeError):
    """Mixture fitting failed after exhausting its restart budget."""
