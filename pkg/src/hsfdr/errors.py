"""Exception hierarchy shared by all modules."""


class HsfdrError(Exception):
    """Base class for package errors."""


class DimensionError(HsfdrError, ValueError):
    """Array lengths disagree."""


class ConfigError(HsfdrError, ValueError):
    """A tuning parameter or level is outside its admissible range."""


class DomainError(HsfdrError, ValueError):
    """Input lies outside the mathematical domain of the operation."""


class FitError(HsfdrError, RuntimeError):
    """A density or null fit failed; ``diagnostics`` carries details."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class SamplerError(HsfdrError, RuntimeError):
    """The Gibbs sampler produced a non-finite draw."""

    def __init__(self, message: str, sweep: int):
        super().__init__(f"{message} (sweep {sweep})")
        self.sweep = sweep


class EstimationError(HsfdrError, RuntimeError):
    """Marginal likelihood evaluation failed."""
