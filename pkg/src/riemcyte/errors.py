"""Exception types shared across the package.

The CLI maps these onto exit codes: usage problems exit 1, data problems
exit 2, numerical failures exit 3.
"""


class RiemcyteError(Exception):
    """Base class for errors raised by this package."""


class UsageError(RiemcyteError):
    """Bad command line arguments or malformed/unknown configuration keys."""


class DataError(RiemcyteError):
    """Unreadable, undecodable, or structurally invalid input data."""


class DegenerateInputError(DataError):
    """Input lacks the variety an algorithm needs (e.g. too few distinct values)."""


class RegionTooSmallError(DataError):
    """Image region has too few pixels to estimate a covariance."""


class EmptyClassError(DataError):
    """A class has fewer samples than the classifier requires."""


class NumericError(RiemcyteError):
    """Numerical failure: violated matrix preconditions or singular systems."""


class NonSymmetricError(NumericError):
    """Matrix expected to be symmetric is not, beyond tolerance."""


class NotPositiveDefiniteError(NumericError):
    """Matrix expected to be positive definite has a non-positive eigenvalue."""


class SingularScatterError(NumericError):
    """Unregularized within-class scatter is numerically singular."""


class DimensionMismatchError(NumericError):
    """Operands or model/data dimensions do not agree."""
