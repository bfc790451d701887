"""Package-level error types shared by envs and the harness."""


class ConfigError(ValueError):
    """Invalid configuration: unknown env id, bad key, out-of-range value."""
