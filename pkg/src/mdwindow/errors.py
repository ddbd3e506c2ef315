"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter or configuration value violates its domain constraints."""


class StateIndexError(ValueError):
    """A level index outside the chain's state space was requested."""


class PrecisionError(ArithmeticError):
    """The requested tolerance cannot be certified with the available
    truncation budget (the result would be smaller than the best rigorous
    remainder bound)."""


class BracketEmptyError(ValueError):
    """The horizon is too small for the certificate's level bracket to
    separate; carries the minimal usable horizon."""

    def __init__(self, message: str, min_n: int):
        super().__init__(message)
        self.min_n = min_n


class WindowBoundaryError(ValueError):
    """The queried scale exponent sits exactly on a window endpoint, where
    the predicted rate is undefined (the windows are open sets)."""
