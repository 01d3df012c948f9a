"""Exception taxonomy shared across the package.

Each class maps to one CLI failure category, so exit codes can be derived
from the exception type alone.
"""


class StructuralError(ValueError):
    """Inputs have inconsistent shapes or types (distinct from a failed check)."""


class ParameterError(ValueError):
    """A scalar parameter is outside its documented domain."""


class SpaceValidationError(ValueError):
    """A metric measure space failed validation; carries the report."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InfeasibleError(RuntimeError):
    """A transport polytope is empty; the message names the violated bound."""


class NoCrossingError(RuntimeError):
    """Robust-metric bisection found no parameter satisfying the threshold
    condition; signals a solver failure, since the acceptance set is nonempty
    in exact arithmetic."""
