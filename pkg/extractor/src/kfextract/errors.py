"""Exception hierarchy shared across the extractor."""


class ExtractError(Exception):
    """Base class for everything this package raises on purpose."""


class UsageError(ExtractError):
    """Bad command line or configuration values."""


class DataError(ExtractError):
    """Undecodable video, missing frames, or unavailable backbone weights."""
