"""Exception types shared across the library.

The CLI maps these onto process exit codes; library callers can catch the
base class to handle any koopfreq failure uniformly.
"""


class KoopfreqError(Exception):
    """Base class for all koopfreq errors."""


class InvalidInputError(KoopfreqError, ValueError):
    """An argument violates an operation's preconditions."""


class DegenerateInputError(KoopfreqError, ValueError):
    """Input is structurally valid but numerically degenerate (e.g. zero variance)."""


class ConvergenceError(KoopfreqError, RuntimeError):
    """An iterative solver failed to reach its residual tolerance."""

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual


class DivergenceError(KoopfreqError, RuntimeError):
    """A trajectory integration blew up (non-finite or unbounded state)."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class ParseError(KoopfreqError, ValueError):
    """A data file failed to parse."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
