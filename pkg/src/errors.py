"""Exception hierarchy shared by every hybridmd module."""

from typing import Optional


class HybridMDError(Exception):
    """Base class for all errors raised by the package"""


class ConfigurationError(HybridMDError):
    """Bad user input: flags, config file values, sizes out of range"""


class EncodingError(HybridMDError):
    """Classical data cannot be amplitude-encoded (zero norm, non-finite entries)"""


class InvalidOperationError(HybridMDError):
    """Gate or circuit operation that is not defined for the given state"""


class NumericError(HybridMDError):
    """Numeric precondition violated (normalization, hermiticity, symmetry)"""


class SingularityError(NumericError):
    """Calibration matrix cannot be inverted"""


class DimensionError(NumericError):
    """Shapes or lengths do not match"""


class InvariantViolation(HybridMDError):
    """An internal structural invariant did not hold"""


class TrajectoryParseError(HybridMDError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TaskFailure(HybridMDError):
    """A pipeline unit failed; carries the frame and segment pair it was working on"""

    def __init__(self, frame: int, pair: int, cause: Exception):
        self.frame = frame
        self.pair = pair
        self.cause = cause
        super().__init__(f"frame {frame}, pair {pair}: {cause}")
