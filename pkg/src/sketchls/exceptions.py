"""Exception types raised across the package."""


class InvalidInputError(ValueError):
    """Raised when arguments violate a documented precondition."""


class NumericError(ArithmeticError):
    """Raised when a factorization or solve fails numerically."""
