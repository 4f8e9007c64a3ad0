"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid filter, optimizer, or experiment configuration."""


class DivergenceError(RuntimeError):
    """Raised when a step encounters a non-finite gradient or loss."""


class DataError(Exception):
    """A data file exists but its contents are unusable."""


class IdxMagicError(DataError):
    """IDX header magic does not match the expected record type."""


class IdxTruncatedError(DataError):
    """IDX payload shorter or longer than its header promises."""


class IdxDimensionError(DataError):
    """IDX dimensions disagree with each other or with the expected shape."""
