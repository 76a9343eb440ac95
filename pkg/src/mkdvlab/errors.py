"""Exception hierarchy shared by every lab module."""


class LabError(Exception):
    """Base class for all errors raised by mkdvlab."""


class ArgumentError(LabError, ValueError):
    """An argument violates an operation's precondition."""


class ResolutionError(LabError, ValueError):
    """The grid cannot represent the requested data or spectrum."""


class NumericError(LabError, ArithmeticError):
    """A non-finite value appeared during a computation."""


class DegenerateSeparationError(ArgumentError):
    """A bilinear pair has zero frequency separation."""


class UndefinedRatioError(ArgumentError):
    """A ratio was requested whose denominator vanishes."""


class BlowUpError(LabError):
    """The solver detected norm growth beyond its guard threshold.

    Attributes
    ----------
    last_valid_time:
        Time of the last sample that passed the guard.
    trajectory:
        Trajectory up to and including ``last_valid_time`` (may be None).
    """

    def __init__(self, message, last_valid_time, trajectory=None):
        super().__init__(message)
        self.last_valid_time = last_valid_time
        self.trajectory = trajectory


class ConfigError(LabError):
    """Configuration text failed validation; ``errors`` lists every problem."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
