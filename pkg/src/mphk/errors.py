"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes, so keep the classes coarse.
"""

from __future__ import annotations

from typing import Any


class MphkError(Exception):
    """Base class for all library errors."""


class InvalidInput(MphkError, ValueError):
    """Malformed or out-of-domain input."""


class CapacityError(MphkError):
    """The requested computation exceeds the enumeration caps."""


class SolverError(MphkError):
    """An LP or flow computation failed numerically."""


class InfeasibleError(SolverError):
    pass


class UnboundedError(SolverError):
    pass


class PreconditionError(InvalidInput):
    """Input violates a constructor precondition; ``witness`` shows where."""

    def __init__(self, message: str, witness: Any = None):
        super().__init__(message)
        self.witness = witness


class VerificationError(MphkError):
    """A certificate or expectation check failed."""
