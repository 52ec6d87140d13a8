"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument violates a documented precondition."""


class ConfigError(ValueError):
    """A run configuration is invalid (bad flag combination, malformed spec)."""


class SizeLimitError(DomainError):
    """An exact computation would exceed its configured size ceiling."""


class ConvergenceError(RuntimeError):
    """A numerical path cannot reach its accuracy target (divergent tail etc.)."""
