"""Exception types shared across the package.

Validation failures (bad arguments, malformed configs, unparseable kernel
files) exit the CLI with code 1; numerical failures (indefinite covariance,
mixed inner products negative beyond tolerance) exit with code 2.
"""


class ValidationError(ValueError):
    """Input violates a documented precondition or schema."""


class UnsupportedRepresentationError(ValidationError):
    """Operation not available for this kernel representation."""


class NumericalError(ArithmeticError):
    """A numerical guard was tripped (not a usage error)."""
