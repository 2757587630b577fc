"""Exception types shared by the solvers and the command line."""


class ConeminkError(Exception):
    """Base class for library errors."""


class PreconditionError(ConeminkError, ValueError):
    """A hypothesis of the underlying theorem is violated by the input."""

    def __init__(self, message: str, hypothesis: str | None = None):
        super().__init__(message)
        self.hypothesis = hypothesis


class ConvergenceError(ConeminkError, RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message: str, residuals=None):
        super().__init__(message)
        self.residuals = residuals
