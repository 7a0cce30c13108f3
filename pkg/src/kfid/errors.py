"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
NumericError -> 3.
"""


class KfidError(Exception):
    """Base class for all package errors."""


class UsageError(KfidError):
    """Bad command-line usage or option values."""


class DataError(KfidError):
    """Invalid input data: bad labels, shape mismatches, missing inputs."""


class FormatError(DataError):
    """Malformed file: manifest, label file, KFF1 or KFH1 container."""


class NumericError(KfidError):
    """Numerical failure during computation, e.g. non-finite training loss."""
