"""Exception types raised across the package."""


class LevyAdaptError(ValueError):
    """Base class for all package-specific errors."""


class UnsupportedCombination(LevyAdaptError):
    """A kernel base family does not support the requested construction."""


class InvalidBandwidth(LevyAdaptError):
    pass


class InsufficientObservationTime(LevyAdaptError):
    """Total observation time n * mean(Delta) must exceed 1 for log(n Delta) > 0."""


class DegenerateC0(LevyAdaptError):
    """The variance constant C0 is zero (e.g. all increments are zero)."""


class PreconditionError(LevyAdaptError):
    pass
