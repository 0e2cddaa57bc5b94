# apps/schrotbc/metrics.py
"""Relative L² errors against an exact profile and convergence-slope fits."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from apps.schrotbc.errors import ContractViolation
from apps.schrotbc.exact import Evaluator, domain_integral
from apps.schrotbc.models import DomainSpec
from apps.schrotbc.specfun import CoeffField, TensorGrid

PLATEAU_ORDER = 0.5                 # local order below which refinement has stalled


def l2_norm(values: np.ndarray, domain: DomainSpec, grid: TensorGrid) -> float:
    return float(np.sqrt(domain_integral(np.abs(values) ** 2, domain, grid).real))


class ErrorProbe:
    """Caches the physical grid and ‖u₀‖ so per-step errors cost one synthesis."""

    def __init__(self, evaluator: Evaluator, domain: DomainSpec, grid: TensorGrid):
        self.evaluator = evaluator
        self.domain = domain
        self.grid = grid
        self.points = domain.to_physical(grid.reference_points())
        self.initial = evaluator(self.points, 0.0)
        self.initial_norm = l2_norm(self.initial, domain, grid)
        if self.initial_norm == 0.0:
            raise ContractViolation("relative error undefined: ‖u₀‖ = 0")

    def exact(self, t: float) -> np.ndarray:
        return self.evaluator(self.points, t)

    def error(self, samples: np.ndarray, t: float) -> float:
        return l2_norm(samples - self.exact(t), self.domain, self.grid) / self.initial_norm


def relative_error(u_num, evaluator: Evaluator, domain: DomainSpec, grid: TensorGrid, t: float) -> float:
    """e(t) = ‖u_num − u(t)‖ / ‖u₀‖ with u_num a CoeffField or grid samples."""
    samples = u_num.samples() if isinstance(u_num, CoeffField) else np.asarray(u_num)
    return ErrorProbe(evaluator, domain, grid).error(samples, t)


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    used: np.ndarray                   # mask of the points in the fit


def fit_slope(dts, errors, plateau_order: float = PLATEAU_ORDER) -> SlopeFit:
    """
    Least-squares slope of log e against log Δt over the pre-plateau points.

    Walking from the coarsest Δt to the finest, the segment ends at the first
    refinement whose local order log(e_i/e_{i+1}) / log(Δt_i/Δt_{i+1}) drops
    below `plateau_order`; everything finer is plateau. When even the first
    refinement stalls, the two coarsest points are fitted.
    """
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if dts.shape != errors.shape or dts.size < 2:
        raise ContractViolation("slope fit needs matching dt/error series of length >= 2")
    if np.any(errors <= 0) or np.any(dts <= 0):
        raise ContractViolation("slope fit needs positive step sizes and errors")
    order = np.argsort(-dts, kind="stable")
    log_dt, log_e = np.log(dts[order]), np.log(errors[order])
    local = np.diff(log_e) / np.diff(log_dt)
    stalled = np.flatnonzero(~(local >= plateau_order))
    keep = stalled[0] + 1 if stalled.size else dts.size
    used = np.zeros(dts.size, dtype=bool)
    used[order[:max(keep, 2)]] = True
    slope, intercept = np.polyfit(np.log(dts[used]), np.log(errors[used]), 1)
    return SlopeFit(slope=float(slope), intercept=float(intercept), used=used)
