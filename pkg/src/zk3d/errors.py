"""Exception types raised across the package."""


class ZKError(Exception):
    """Base class for all package errors."""


class InvalidGridError(ZKError, ValueError):
    pass


class DimensionError(ZKError, ValueError):
    pass


class KrylovStagnationError(ZKError, RuntimeError):
    """GMRES did not reach its tolerance.

    The best iterate found and its relative residual are attached so the
    caller can decide whether it is good enough.
    """

    def __init__(self, message, best, relative_residual):
        super().__init__(message)
        self.best = best
        self.relative_residual = relative_residual


class NonConvergenceError(ZKError, RuntimeError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class DegenerateSolutionError(ZKError, RuntimeError):
    pass


class BlowUpError(ZKError, FloatingPointError):
    """Non-finite values appeared during time stepping."""

    def __init__(self, message, step, series=None):
        super().__init__(message)
        self.step = step
        self.series = series if series is not None else []


class ScenarioError(ZKError, ValueError):
    pass


class NoRadiationError(ZKError, ValueError):
    pass


class ConeParameterError(ZKError, ValueError):
    pass


class DriftUndefinedError(ZKError, ZeroDivisionError):
    pass


class SnapshotFormatError(ZKError, ValueError):
    pass


class ConfigError(ZKError, ValueError):
    """Raised by the config parser; ``lineno`` is None for whole-file errors."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
