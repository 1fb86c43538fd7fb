"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A parameter or configuration entry violates its contract."""


class InputError(ValueError):
    """An input array is malformed (non-finite, wrong shape, ...)."""
