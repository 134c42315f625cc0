"""Exception hierarchy. CLI exit codes key off these classes."""


class SemiActiveError(Exception):
    pass


class ValidationError(SemiActiveError, ValueError):
    """Invalid parameter, configuration value or precondition."""


class SingularMatrixError(SemiActiveError, ArithmeticError):
    pass


class DivergenceError(SemiActiveError, ArithmeticError):
    """The integrator produced a non-finite state."""

    def __init__(self, t: float, dt: float, message: str | None = None):
        self.t = t
        self.dt = dt
        super().__init__(message or f"simulation diverged at t={t:.6g} s (dt={dt:g} s)")


class RoadFormatError(SemiActiveError, ValueError):
    """Malformed road CSV file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
