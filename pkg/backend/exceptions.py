__module_name__ = "exceptions"

"""
Exception hierarchy for kronsolve.

Every error raised by the backend derives from KronSolveError and from the
builtin exception a caller would naturally catch, so ``except ValueError``
keeps working for bad arguments and ``except ArithmeticError`` for numerical
breakdowns.
"""

from typing import Any, Optional, Sequence


class KronSolveError(Exception):
    """Base class for all kronsolve errors."""


class ParameterError(KronSolveError, ValueError):
    """A scalar parameter is outside its admissible range."""


class InputError(KronSolveError, ValueError):
    """Input data (coordinates, samples) violates a structural precondition."""


class ShapeError(KronSolveError, ValueError):
    """Array shapes or sizes do not agree."""


class UnsupportedOrderError(KronSolveError, ValueError):
    """A derivative order above the supported maximum was requested."""


class ConfigurationError(KronSolveError, ValueError):
    """A run, benchmark or domain configuration is inconsistent."""


class ManifestError(ConfigurationError):
    """A manifest could not be parsed; ``field_path`` names the bad field."""

    def __init__(self, message: str, field_path: str = ""):
        self.field_path = field_path
        prefix = f"{field_path}: " if field_path else ""
        super().__init__(f"{prefix}{message}")


class NumericalError(KronSolveError, ArithmeticError):
    """A factorization failed or a non-finite value appeared."""


class DivergenceError(NumericalError):
    """The optimizer diverged; ``trace`` holds the rows logged so far."""

    def __init__(self, message: str, trace: Optional[Any] = None):
        self.trace = trace
        super().__init__(message)


class NewtonConvergenceError(NumericalError):
    """Newton iterations did not reach the tolerance."""

    def __init__(self, message: str, residual_history: Sequence[float] = ()):
        self.residual_history = list(residual_history)
        history = ", ".join(f"{r:.3e}" for r in self.residual_history)
        super().__init__(f"{message} (residual history: [{history}])")


class StorageError(KronSolveError, OSError):
    """A binary cache or dump file is malformed or corrupted."""


__all__ = [
    "KronSolveError",
    "ParameterError",
    "InputError",
    "ShapeError",
    "UnsupportedOrderError",
    "ConfigurationError",
    "ManifestError",
    "NumericalError",
    "DivergenceError",
    "NewtonConvergenceError",
    "StorageError",
]
