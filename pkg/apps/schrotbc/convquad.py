# apps/schrotbc/convquad.py
"""Convolution-quadrature weights for ∂_t^{±1/2} and the history sum."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from apps.schrotbc.errors import ContractViolation
from apps.schrotbc.models import Method


@dataclass(frozen=True)
class CqTable:
    method: Method
    nu: float
    weights: np.ndarray

    def __len__(self) -> int:
        return self.weights.size


def cq_weights(method: Method, nu: float, n: int) -> CqTable:
    """
    ω_0..ω_n, the Taylor coefficients of (1−x)^ν (BDF1) or ((1−x)/(1+x))^ν (TR).
    """
    if n < 0:
        raise ContractViolation(f"weight count must be >= 0, got {n}")
    w = np.zeros(n + 1)
    w[0] = 1.0
    if method is Method.BDF1:
        for k in range(1, n + 1):
            w[k] = (k - 1 - nu) / k * w[k - 1]
    else:
        if n >= 1:
            w[1] = -2.0 * nu
        for k in range(1, n):
            w[k + 1] = ((k - 1) * w[k - 1] - 2.0 * nu * w[k]) / (k + 1)
    return CqTable(method=method, nu=nu, weights=w)


def history_sum(table: CqTable, slices, start_index: int = 1) -> np.ndarray:
    """
    Σ_{k=start}^{j+1} ω_k · slices[j+1−k] for slices indexed 0..j along axis 0.

    The k=0 term belongs to the Robin coefficient and is left out by default.
    """
    slices = np.asarray(slices)
    if slices.ndim < 1 or slices.shape[0] == 0:
        raise ContractViolation("history_sum needs at least one slice")
    if start_index < 1:
        raise ContractViolation(f"start_index must be >= 1, got {start_index}")
    count = slices.shape[0]                     # j+1
    if count + 1 > len(table):
        raise ContractViolation(f"{count} slices need {count + 1} weights, table has {len(table)}")
    ks = np.arange(start_index, count + 1)
    # slices[j+1−k] for k = start..j+1 → indices j+1−start down to 0
    picked = slices[count - ks]
    return np.tensordot(table.weights[ks], picked, axes=(0, 0))
