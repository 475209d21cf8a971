"""Exception types raised by the engine modules."""
from __future__ import annotations


class WorkbenchError(Exception):
    """Base class for engine errors."""


class StructuralMismatch(WorkbenchError):
    """An instance references sigs, fields or atoms unknown to the model/universe."""


class ScopeTooLarge(WorkbenchError):
    """The candidate space at the requested scope exceeds the search budget."""

    def __init__(self, bits: float, budget_bits: float):
        super().__init__(
            f"candidate space is about 2^{bits:.0f}, over the 2^{budget_bits:.0f} budget; "
            "reduce the scope"
        )
        self.bits = bits
        self.budget_bits = budget_bits


class Cancelled(WorkbenchError):
    """A cooperative cancellation token fired during a long-running search."""


class UnboundVariable(WorkbenchError):
    """Evaluation reached a variable with no binding (type checker should prevent this)."""


class VacuousPrefix(WorkbenchError):
    """The completion prefix has a provably-empty relational type."""


class NoPrefixContext(WorkbenchError):
    """The cursor is not positioned after a dot-expression prefix."""


class SessionNotFound(WorkbenchError):
    """No session with the given id."""
