"""Exception hierarchy shared by every module."""


class TsMatrixError(Exception):
    """Base class for all library errors."""


class DomainError(TsMatrixError, ValueError):
    """A point is outside the time scale (or outside T^kappa where required)."""


class DimensionError(TsMatrixError, ValueError):
    """Matrix shapes do not agree."""


class RegressivityError(TsMatrixError, ArithmeticError):
    """I + mu*K is singular at some point."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class CommutationError(TsMatrixError, ValueError):
    """A generator family does not commute, so the closed-form exponential is invalid."""


class SolverError(TsMatrixError, RuntimeError):
    """Field evaluation or an implicit step failed; ``t`` is the witness time."""

    def __init__(self, message, t=None, residual=None):
        super().__init__(message)
        self.t = t
        self.residual = residual


class ConvergenceError(SolverError):
    pass


class ExpressionError(TsMatrixError, ValueError):
    """Syntax or name error in a field expression; ``pos`` is a 0-based column."""

    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} (column {pos + 1})"
        super().__init__(message)
        self.pos = pos


class ExpressionDomainError(TsMatrixError, ArithmeticError):
    """Runtime domain violation while evaluating an expression (1/0, sqrt(-1), ...)."""


class ConfigError(TsMatrixError, ValueError):
    def __init__(self, message, line=None, col=None, path=None):
        loc = ""
        if path:
            loc = " at " + "/".join(str(p) for p in path)
        if line is not None:
            loc += f" (line {line}, column {col})"
        super().__init__(message + loc)
        self.line = line
        self.col = col
        self.path = path
