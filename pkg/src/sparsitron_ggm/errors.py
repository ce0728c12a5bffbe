"""Exception types raised across the package."""


class GGMError(Exception):
    """Base class for all package errors."""


class NotPositiveDefinite(GGMError):
    pass


class EmptyGraph(GGMError):
    """Raised when a quantity needs at least one edge (e.g. kappa)."""


class InfeasibleDegree(GGMError):
    pass


class BudgetExceeded(GGMError):
    """A signed weight vector has l1 norm above the declared budget."""


class InsufficientSamples(GGMError):
    pass


class DimensionMismatch(GGMError):
    pass


class MalformedInput(GGMError):
    """Unparseable model / sample / config file."""
