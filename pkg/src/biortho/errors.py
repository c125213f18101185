"""Refusal exceptions raised when a construction is mathematically blocked."""

from enum import Enum


class RefusalReason(str, Enum):
    HAS_ZERO = "has_zero"
    NON_CONVERGENT = "non_convergent"
    DIVERGENT = "divergent"
    INDEFINITE = "indefinite"


class Refusal(Exception):
    """Base class for diagnostic refusals.

    A refusal is not a bug: it reports that the requested object does not
    exist (or cannot be trusted) for the given input, and carries a
    machine-readable ``diagnostic`` mapping describing why.
    """

    reason: RefusalReason

    def __init__(self, message, **diagnostic):
        super().__init__(message)
        self.diagnostic = diagnostic

    def to_dict(self):
        out = {"status": self.reason.value, "reason": self.reason.value, "message": str(self)}
        out.update(self.diagnostic)
        return out


class SymbolZeroError(Refusal):
    reason = RefusalReason.HAS_ZERO


class NonConvergenceError(Refusal):
    reason = RefusalReason.NON_CONVERGENT


class DivergenceError(Refusal):
    reason = RefusalReason.DIVERGENT


class IndefiniteError(Refusal):
    reason = RefusalReason.INDEFINITE
