"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model or experiment was wired up inconsistently (wrong dimensions,
    unknown method name, invalid proposal scales, ...)."""


class DegenerateChainError(ValueError):
    """A diagnostic was asked for on input that carries no information
    (zero-variance chain, counter pair with no proposals)."""
