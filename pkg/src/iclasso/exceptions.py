"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration (bad dimensions, empty grids, out-of-range knobs)."""


class NumericError(RuntimeError):
    """Numerical failure: non-finite inputs/intermediates or a factorization breakdown."""


class DegenerateColumnError(NumericError):
    """A zero design column with no penalty leaves a coordinate unidentified."""
