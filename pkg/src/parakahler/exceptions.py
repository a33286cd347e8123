"""Exception types raised by the library."""

import numpy as np


class ParakahlerError(Exception):
    """Base class for all library errors."""


class DegenerateSubspaceError(ParakahlerError, ValueError):
    """A subspace is degenerate for the metric.

    Attributes
    ----------
    witness : ndarray or None
        A nonzero isotropic vector in the radical of the restricted metric.
    signature : tuple or None
        ``(n_plus, n_minus, n_zero)`` eigen-sign count of the Gram matrix.
    """

    def __init__(self, message, witness=None, signature=None):
        super().__init__(message)
        self.witness = None if witness is None else np.asarray(witness, dtype=float)
        self.signature = signature


class ChartValidationError(ParakahlerError):
    """A chart failed its curvature validation gate."""

    def __init__(self, message, gate=None):
        super().__init__(message)
        self.gate = gate


class ImmersionError(ParakahlerError, ValueError):
    """An immersion is singular or fails a structural predicate at a point."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class ScenarioError(ParakahlerError, ValueError):
    """A scenario file is unreadable or malformed.

    ``line`` and ``column`` are 1-based positions when the error can be
    located in the source text.
    """

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
