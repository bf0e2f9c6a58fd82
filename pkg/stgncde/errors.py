"""Exception hierarchy shared by the library and the command line."""


class StgncdeError(Exception):
    """Base class for all errors raised by stgncde"""

    exit_code = 1


class ConfigError(StgncdeError):
    """Invalid configuration key, value, grid point or CLI argument"""

    exit_code = 2


class DataError(StgncdeError):
    """Dataset files missing, malformed or inconsistent with their metadata"""

    exit_code = 3


class ParseError(DataError):
    """Non-numeric cell in a values CSV"""

    def __init__(self, line: int, column: str, value: str):
        self.line = line
        self.column = column
        self.value = value
        super().__init__(f"Non-numeric value {value!r} at line {line}, column {column!r}")


class DivergenceError(StgncdeError):
    """Numerical state or loss became non-finite"""

    exit_code = 4


class ShapeError(StgncdeError, ValueError):
    """Operand shapes are incompatible"""


class GradientError(StgncdeError):
    """Contract violation in reverse-mode differentiation"""


class SplineError(StgncdeError, ValueError):
    """Spline knots are insufficient or out of order"""


class DomainError(StgncdeError, ValueError):
    """Evaluation time lies outside the integration window"""
