"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid model, claim or experiment configuration."""


class ArbitrageError(ValueError):
    """A one-period node admits arbitrage (spot outside the hull of its children)."""


class EnumerationLimitError(RuntimeError):
    """Exact enumeration was requested beyond the configured cap."""


class TrainingError(RuntimeError):
    """Training produced a non-finite loss."""

    def __init__(self, message: str, iteration: int | None = None):
        super().__init__(message)
        self.iteration = iteration
