"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class WiretapNetError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(WiretapNetError, ValueError):
    """Dimension mismatch or malformed object."""


class ParseError(WiretapNetError, ValueError):
    """Syntax or semantic error in a description document."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class ConvergenceError(WiretapNetError, RuntimeError):
    """An iterative solver ran out of iterations.

    The last iterate is kept so callers can decide whether it is usable.
    """

    def __init__(self, message: str, last_value: float, last_iterate):
        super().__init__(message)
        self.last_value = last_value
        self.last_iterate = last_iterate


class PreconditionError(WiretapNetError, ValueError):
    """An operation was called on an object it does not apply to."""


class ModelAssumptionError(WiretapNetError, ValueError):
    """A channel or network violates a modelling assumption (e.g. not
    simultaneously maximizable, or rate hypotheses unsatisfiable)."""


class EligibilityError(PreconditionError):
    """Equivalence replacement requested for a jointly wiretapped edge."""

    def __init__(self, message: str, offending_set=None):
        super().__init__(message)
        self.offending_set = offending_set


class HypothesisError(ModelAssumptionError):
    """Rates supplied for the enhanced construction break its strict bounds."""


class KeyDeliveryError(ModelAssumptionError):
    """Some eavesdropper node cannot receive all keys."""

    def __init__(self, message: str, sets=()):
        super().__init__(message)
        self.sets = tuple(sets)


class BudgetError(WiretapNetError, RuntimeError):
    """Exact enumeration would exceed the configured budget."""
