"""Exception types shared across the package.

The CLI maps these onto stable exit codes, so library code raises the
most specific type that applies instead of bare ValueError/RuntimeError.
"""


class ZsiisError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(ZsiisError, ValueError):
    """Tensor shape or parity violates an operation's contract."""


class ConfigError(ZsiisError, ValueError):
    """Invalid configuration value, file, or key."""


class DataError(ZsiisError, RuntimeError):
    """Dataset or image file cannot be used (missing, undecodable, too small)."""


class CheckpointError(ZsiisError, RuntimeError):
    """Checkpoint file is malformed or inconsistent with the requested model."""


class DivergenceError(ZsiisError, RuntimeError):
    """Training produced a non-finite loss."""
