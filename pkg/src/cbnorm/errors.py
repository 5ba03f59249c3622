"""Exception types shared across the package."""


class CbnormError(Exception):
    """Base class for all package errors."""


class InvalidInputError(CbnormError, ValueError):
    """Raised for malformed or dimensionally inconsistent inputs."""


class NotPositiveSemidefiniteError(InvalidInputError):
    """Raised when an operator required to be PSD has a significantly
    negative eigenvalue."""


class NumericalFailureError(CbnormError, RuntimeError):
    """Raised when an iterative computation produces non-finite values or
    fails to converge."""
