# apps/schrotbc/ratapprox.py
"""Diagonal Padé approximants of √z in partial-fraction form."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from apps.schrotbc.errors import ContractViolation, PoleError


@dataclass(frozen=True)
class PadeTable:
    """R_M(z) = b0 − Σ_k b_k / (z + η_k²)."""
    order: int
    b0: float
    b: np.ndarray
    eta: np.ndarray

    @property
    def poles(self) -> np.ndarray:
        return -self.eta ** 2


@dataclass(frozen=True)
class NpRobinConstants:
    rho: float
    b0_bar: float
    b_bar: np.ndarray
    eta_bar_sq: np.ndarray
    Gamma: np.ndarray
    varpi: float


def pade_sqrt_table(M: int) -> PadeTable:
    if M < 1:
        raise ContractViolation(f"Padé order must be >= 1, got {M}")
    theta = np.arange(1, M + 1) * np.pi / (2 * M + 1)
    eta = np.tan(theta)
    b = 2.0 * eta ** 2 * (1.0 + eta ** 2) / (2 * M + 1)
    return PadeTable(order=M, b0=float(2 * M + 1), b=b, eta=eta)


def pade_sqrt_eval(table: PadeTable, z):
    z = np.asarray(z, dtype=complex)
    denom = z[..., None] + table.eta ** 2
    if np.any(denom == 0):
        raise PoleError(f"z hits a pole of R_{table.order}", {"z": z.tolist()})
    out = table.b0 - np.sum(table.b / denom, axis=-1)
    return complex(out) if out.ndim == 0 else out


def np_robin_constants(table: PadeTable, rho: float) -> NpRobinConstants:
    """
    Scaled Padé data for the time-discrete maps: b̄ = b/√ρ, η̄² = η²/ρ,
    Γ_k = −b̄_k/(1+η̄_k²) and ϖ = b̄₀ + (1/ρ)ΣΓ_k, which equals R_M(ρ)/√ρ.
    """
    if rho <= 0:
        raise ContractViolation(f"rho must be positive, got {rho}")
    sq = np.sqrt(rho)
    b_bar = table.b / sq
    eta_bar_sq = table.eta ** 2 / rho
    gamma = -b_bar / (1.0 + eta_bar_sq)
    b0_bar = table.b0 / sq
    varpi = b0_bar + gamma.sum() / rho
    return NpRobinConstants(rho=float(rho), b0_bar=float(b0_bar), b_bar=b_bar,
                            eta_bar_sq=eta_bar_sq, Gamma=gamma, varpi=float(varpi))
