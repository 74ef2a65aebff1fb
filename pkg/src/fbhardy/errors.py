"""Error types shared across the package."""


class ConfigError(ValueError):
    """Raised when a run configuration fails validation."""


class NumericsError(RuntimeError):
    """Raised when an iterative or truncated numerical routine cannot certify
    its result (zero finder stalls, series tail not boundable, quadrature
    domain too small, ...).  Carries the name of the failing operation so the
    CLI can report it."""

    def __init__(self, operation: str, message: str):
        super().__init__(f"{operation}: {message}")
        self.operation = operation
        self.detail = message
