"""Exception types shared across the package."""


class ChaoslimError(Exception):
    """Base class for all package errors."""


class InputError(ChaoslimError, ValueError):
    """Malformed or inconsistent input (off-lattice point, missing value, ...)."""


class PreconditionError(ChaoslimError, ValueError):
    """A stated hypothesis of the method is violated; no silent fallback."""


class ConditioningError(ChaoslimError, ZeroDivisionError):
    """Conditioning event has zero probability."""


class DomainError(ChaoslimError, ValueError):
    """Quantity is not defined at the requested point (diagonals, alpha out of range)."""


class ResourceError(ChaoslimError, RuntimeError):
    """Exact computation would exceed the configured size caps."""


class NumericError(ChaoslimError, RuntimeError):
    """A numeric routine failed to converge or lost too much mass."""
