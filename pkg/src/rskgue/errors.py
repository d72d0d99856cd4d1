"""Exception types shared across the package.

The CLI maps these onto exit codes: input errors exit 2, resource errors exit 3.
"""


class InputError(ValueError):
    """Malformed or out-of-domain input."""


class ResourceError(RuntimeError):
    """A requested computation exceeds a configured size cap."""


class NumericError(ArithmeticError):
    """An iterative numerical procedure failed to converge."""
