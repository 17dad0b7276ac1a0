"""Exception types shared by all modules."""


class SasvError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SasvError, ValueError):
    """An input lies outside the domain of the operation (zero probability,
    non-finite score, prior out of range, ...)."""


class FitError(SasvError, RuntimeError):
    """A model could not be estimated from the supplied data."""


class MetricError(SasvError, ValueError):
    """A metric is undefined for the supplied trials (e.g. a class is missing)."""
