"""
Exception hierarchy for the coxtet engine.
"""

from enum import Enum
from typing import Any, Dict, Optional


class RejectReason(Enum):
    """Conditions a gluing attempt can fail, in the order they are checked."""
    C1 = "C1"  # face congruence and mirror-equal traces
    C2 = "C2"  # exactly two flattened edge pairs
    C3 = "C3"  # fused apex edge
    C4 = "C4"  # third pair is a proper angle
    C5 = "C5"  # hyperbolic result
    PRUNED = "pruned"  # volume bound or tile cap


class CoxtetError(Exception):
    """Base class for every error raised by coxtet."""


class StructuralError(CoxtetError, ValueError):
    """Malformed shape, diagram or matrix (missing angle, degenerate link)."""


class DomainError(CoxtetError, ValueError):
    """An operation was applied outside its domain (e.g. a non-hyperbolic shape)."""


class PrecisionError(CoxtetError, ArithmeticError):
    """Numerical error bound too large to reach a verdict; raise working precision."""

    def __init__(self, message: str, *, err: float = 0.0, tol: float = 0.0):
        super().__init__(message)
        self.err = err
        self.tol = tol


class GlueRejection(CoxtetError):
    """A gluing attempt failed one of the acceptance conditions."""

    def __init__(self, reason: RejectReason, message: str):
        super().__init__(f"{reason.value}: {message}")
        self.reason = reason


class CertificationError(CoxtetError):
    """A decomposition failed geometric certification."""

    def __init__(self, message: str, *, counterexample: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.counterexample: Dict[str, Any] = dict(counterexample or {})


class ClassificationError(CoxtetError):
    """The classification itself is broken (third type found, wrong second-type list)."""


class CacheError(CoxtetError):
    """Cache file is corrupt or written by an incompatible version."""
