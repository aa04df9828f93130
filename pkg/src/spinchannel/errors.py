"""Exception types shared across the package."""


class SpinChannelError(Exception):
    """Base class for package errors."""


class ShapeError(SpinChannelError, ValueError):
    """Array dimensions do not fit together."""


class ConfigError(SpinChannelError, ValueError):
    """An experiment configuration failed validation."""


class NumericError(SpinChannelError, ArithmeticError):
    """A numerical routine could not produce a trustworthy result."""


class NoPeakError(NumericError):
    """No interior maximum inside the search window."""


class BracketError(NumericError):
    """A root could not be bracketed."""


class ThresholdError(NumericError):
    """The classical-threshold function does not change sign on the search interval."""


class ValidationError(SpinChannelError, ValueError):
    """Input is not a valid density matrix within tolerance."""
