# apps/schrotbc/errors.py
from typing import Any, Optional


class SchrotbcError(Exception):
    """
    Base exception for everything raised by the solver package.
    """
    def __init__(self, message: str, details: Optional[Any] = None):
        super().__init__(message)
        self.details = details


class ContractViolation(SchrotbcError, ValueError):
    """
    Raised when a caller breaks an operation's preconditions
    (shape or length mismatch, bank out of step, inconsistent rho).
    """


class DiagnosticError(SchrotbcError):
    """
    Raised when a numerical kernel cannot produce a trustworthy result.
    """


class LglConvergenceError(DiagnosticError):
    """
    Raised when the Lobatto node iteration does not converge.
    """


class PoleError(DiagnosticError):
    """
    Raised when an input hits a pole (Padé table, basis recurrence, lifting).
    """


class SingularSystemError(DiagnosticError):
    """
    Raised when a per-mode LU factorization breaks down.
    """


class ConfigError(SchrotbcError):
    """
    Raised for malformed or inconsistent run configurations.
    """


class InstabilityError(SchrotbcError):
    """
    Raised when the field blows up (NaN/Inf or growth past the cap).
    """
    def __init__(self, step: int, norm: float, message: str = ""):
        super().__init__(message or f"instability at step {step}: norm={norm:.3e}",
                         {"step": step, "norm": norm})
        self.step = step
        self.norm = norm
