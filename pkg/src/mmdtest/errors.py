"""Exception types shared across the package."""


class MMDTestError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(MMDTestError, ValueError):
    """Inputs have inconsistent or invalid dimensions."""


class ParameterError(MMDTestError, ValueError):
    """A scalar parameter is outside its valid range."""


class InsufficientSamplesError(MMDTestError, ValueError):
    """Too few samples for the requested statistic."""


class PairingError(MMDTestError, ValueError):
    """Operation requires equally sized sample groups."""


class DistributionError(MMDTestError, ValueError):
    """Invalid finite discrete distribution."""


class EnumerationTooLargeError(MMDTestError, ValueError):
    """Exhaustive enumeration would exceed the configured cap."""


class IncompleteTableError(MMDTestError, LookupError):
    """A variance-component table is missing a required entry."""


class DataError(MMDTestError, ValueError):
    """Malformed input data file."""
