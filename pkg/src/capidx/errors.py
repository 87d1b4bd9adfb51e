"""Exception hierarchy shared across the package."""


class CapidxError(Exception):
    """Base class for all package errors."""


class DomainError(CapidxError, ValueError):
    """An input is outside the mathematical domain of the operation."""


class DegenerateFitError(DomainError):
    """A quantile fit collapsed (non-positive branch coefficient or radicand)."""


class MomentExistenceError(DomainError):
    """The requested moment does not exist (gamma pole at r >= n-1)."""


class ConvergenceError(CapidxError, ArithmeticError):
    """A series or quadrature failed to converge within its budget."""
