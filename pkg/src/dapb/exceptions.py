"""Exception types raised by the package."""


class ValidationError(ValueError):
    """Input failed a structural check (shape, symmetry, range)."""


class RankError(ValueError):
    """Matrix is singular or indefinite where a positive definite one is required."""


class GenerationError(RuntimeError):
    """Scenario generation could not satisfy the geometric constraints."""


class ConfigError(ValueError):
    """Simulation or campaign configuration is invalid."""
