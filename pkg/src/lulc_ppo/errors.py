"""Exception types shared across the package.

The CLI maps these onto exit codes: config problems exit 1, runtime
problems exit 2, infeasible scenarios exit 3.
"""


class LulcPpoError(Exception):
    """Base class for all package errors."""


class ConfigError(LulcPpoError):
    """Invalid or unreadable run configuration (CLI exit 1)."""


class EmptyGrid(LulcPpoError):
    """Operation requires at least one pixel."""


class InfeasibleScenario(LulcPpoError):
    """Scenario targets cannot be realized on the given histogram (CLI exit 3)."""

    def __init__(self, message: str, violating_class: "int | None" = None):
        super().__init__(message)
        self.violating_class = violating_class


class EpisodeFinished(LulcPpoError):
    """step() called after the episode already ended."""


class ShapeMismatch(LulcPpoError):
    """Array shapes do not match the network architecture."""


class NonFiniteLoss(LulcPpoError):
    """Training produced NaN/Inf; the run is aborted with diagnostics."""


class CheckpointError(LulcPpoError):
    """Checkpoint failed an integrity or compatibility check (CLI exit 2)."""
