"""Exception hierarchy shared by every module of the package."""


class SoftExpError(Exception):
    """Base class for all errors raised by :mod:`softexp`."""


class DomainError(SoftExpError, ValueError):
    """A logarithm-branch argument fell outside the allowed domain."""


class NonFiniteInputError(SoftExpError, ValueError):
    """An input contained NaN or infinity."""


class RangeError(SoftExpError, OverflowError):
    """A result overflowed the floating point range."""


class ShapeError(SoftExpError, ValueError):
    """Array shapes do not agree with the network they are used with."""


class NetworkFormatError(SoftExpError, ValueError):
    """A network document could not be parsed."""


class DatasetFormatError(SoftExpError, ValueError):
    """A dataset file could not be parsed."""


class DivergenceError(SoftExpError, ArithmeticError):
    """Training produced a non-finite loss."""
