"""Exception types shared across the pipeline."""


class DataError(ValueError):
    """Input data is missing, malformed, or violates a precondition."""


class NumericError(ArithmeticError):
    """A numerical routine produced non-finite values or failed to converge."""
