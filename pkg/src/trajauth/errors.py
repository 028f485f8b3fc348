"""Exception hierarchy shared across the pipeline."""


class TrajAuthError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TrajAuthError):
    """Invalid configuration (unknown layout, bad experiment code, bad window sizes)."""


class ParseError(TrajAuthError):
    """Malformed input file."""


class ShapeError(TrajAuthError, ValueError):
    pass


class ContractError(TrajAuthError):
    """An operation was called outside its precondition."""


class NumericalError(TrajAuthError, FloatingPointError):
    """NaN/Inf detected in a gradient or loss."""


class DataError(TrajAuthError):
    """Corpus content cannot satisfy the request (missing session, single user...)."""
