"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`RcaError`.
The CLI maps the three families onto stable exit codes (parameter -> 2,
data -> 3, numeric -> 4).
"""


class RcaError(Exception):
    """Base class for all package errors."""


class ParameterError(RcaError, ValueError):
    """An argument or configuration value is outside its valid range."""


class DataError(RcaError, ValueError):
    """The input series cannot be used as given."""


class InsufficientDataError(DataError):
    """The series is too short for the requested computation."""


class DegenerateSeriesError(DataError):
    """The series carries no scale information (all values zero)."""


class DomainError(DataError):
    """A transform was applied outside its mathematical domain."""


class NumericError(RcaError, ArithmeticError):
    """A numerical procedure failed (overflow, no bracketed root, ...)."""


class SimulationOverflowError(NumericError, OverflowError):
    """A simulated path left the finite float64 range.

    Attributes
    ----------
    step : int
        1-based index of the offending step, counted over the full run
        including the burn-in segment.
    """

    def __init__(self, step: int, total: int):
        self.step = step
        self.total = total
        super().__init__(
            f"simulated path overflowed at step {step} of {total}; "
            "use a shorter sample for explosive parameterisations"
        )
