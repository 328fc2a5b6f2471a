"""Exception types shared across the pipeline."""


class ConfigError(Exception):
    """Invalid configuration file, key, or value. CLI exit code 1."""


class DataError(Exception):
    """Malformed input data or missing stage prerequisite. CLI exit code 2."""


class DivergenceError(Exception):
    """Non-finite value encountered during training or encoding. CLI exit code 3."""
