# apps/schrotbc/tbc_maps.py
"""
Discrete Robin data for the two walls.

Every scheme follows the same two-phase protocol per step j → j+1:

    emit    using the banks at step j, produce RobinData (κ and the wall
            history B̃) for the linear solve;
    commit  once the solve has produced the new wall traces, advance the banks.

Wall traces and histories are (2, nmodes) arrays, row 0 = left wall,
row 1 = right wall.  The per-mode transverse symbol is
s_m = α₂⁻²m₂² (+ α₃⁻²m₃²), so that D_m = 1 + s_m.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from apps.schrotbc.convquad import CqTable, cq_weights, history_sum
from apps.schrotbc.errors import ContractViolation
from apps.schrotbc.models import (DomainSpec, Family, Method, RobinData, SchemeSpec,
                                  Stagger, TimeGrid)
from apps.schrotbc.ratapprox import NpRobinConstants, PadeTable, np_robin_constants, pade_sqrt_table
from apps.schrotbc.specfun import TensorGrid

log = logging.getLogger(__name__)


def alpha_coefficient(rho: float, beta_j: float) -> complex:
    """α_j = √(ρ/β_j)·e^{−iπ/4}, principal root (β_j < 0 gives i√|ρ/β_j|)."""
    return complex(np.sqrt(complex(rho / beta_j)) * np.exp(-0.25j * np.pi))


@dataclass(frozen=True)
class BoundaryContext:
    method: Method
    rho: float
    alpha1: complex
    s: np.ndarray

    @property
    def D(self) -> np.ndarray:
        return 1.0 + self.s

    @property
    def nmodes(self) -> int:
        return self.s.size

    @property
    def stagger(self) -> Stagger:
        return Stagger.WHOLE_STEP if self.method is Method.BDF1 else Stagger.STAGGERED

    @classmethod
    def from_run(cls, domain: DomainSpec, timegrid: TimeGrid, grid: TensorGrid) -> "BoundaryContext":
        if grid.dim != domain.dim:
            raise ContractViolation(f"grid dim {grid.dim} != domain dim {domain.dim}")
        rho = timegrid.rho
        s = np.zeros(grid.nmodes, dtype=complex)
        for beta_p, m in zip(domain.beta_perp, grid.mode_numbers()):
            s += m.astype(float) ** 2 / alpha_coefficient(rho, beta_p) ** 2
        return cls(method=timegrid.method, rho=rho,
                   alpha1=alpha_coefficient(rho, domain.beta1), s=s)

    def robin(self, kappa, history: np.ndarray) -> RobinData:
        kappa = np.broadcast_to(np.asarray(kappa, dtype=complex), (self.nmodes,)).copy()
        return RobinData(kappa=kappa, history=history, stagger=self.stagger)


# ─────────────────────────── banks ──────────────────────────────────
@dataclass
class AuxBankCQ:
    """τ₁-slices φ^{k,·} for k = 0..j, all held at τ₂-level j."""
    slices: np.ndarray                 # (capacity, 2, nmodes)
    count: int = 1
    last_history: np.ndarray = None    # B̃^j, for the TR average

    @classmethod
    def create(cls, capacity: int, u0_walls: np.ndarray) -> "AuxBankCQ":
        slices = np.zeros((max(capacity, 1), *u0_walls.shape), dtype=complex)
        slices[0] = u0_walls
        return cls(slices=slices, count=1, last_history=np.zeros(u0_walls.shape, dtype=complex))

    @property
    def step(self) -> int:
        return self.count - 1

    @property
    def live(self) -> np.ndarray:
        return self.slices[:self.count]


@dataclass
class _PadeBank:
    phi: np.ndarray                    # (2, M, nmodes)
    step: int = 0

    @classmethod
    def create(cls, order: int, nmodes: int):
        return cls(phi=np.zeros((2, order, nmodes), dtype=complex))


class AuxBankNP(_PadeBank):
    """φ_k^{j,j} per wall and mode, zero at j = 0."""


class AuxBankCP(_PadeBank):
    """φ_k^j per wall and mode, zero at j = 0."""


@dataclass
class TraceHistory:
    """Past wall traces for the HF sums: u^0..u^j (BDF1) or v^0=0, v^1..v^j (TR)."""
    traces: np.ndarray                 # (capacity, 2, nmodes)
    count: int = 1

    @classmethod
    def create(cls, capacity: int, first: np.ndarray) -> "TraceHistory":
        traces = np.zeros((max(capacity, 1), *first.shape), dtype=complex)
        traces[0] = first
        return cls(traces=traces, count=1)

    @property
    def step(self) -> int:
        return self.count - 1

    @property
    def live(self) -> np.ndarray:
        return self.traces[:self.count]


def _check_step(bank_step: int, step: int) -> None:
    if bank_step != step:
        raise ContractViolation(f"bank at step {bank_step}, solver at step {step}")


def _append(store: np.ndarray, count: int, walls: np.ndarray) -> None:
    if count >= store.shape[0]:
        raise ContractViolation(f"bank capacity {store.shape[0]} exhausted")
    store[count] = walls


# ─────────────────────────── CQ ─────────────────────────────────────
def cq_boundary_step(ctx: BoundaryContext, bank: AuxBankCQ, weights: CqTable, step: int) -> RobinData:
    """
    Advance every slice one τ₂ step (BDF1: 1/D_m, TR: (1−s_m)/D_m), then
    B̃^{j+1} = Σ_{k=1}^{j+1} ω_k^{(1/2)} φ^{j+1−k,j+1}; TR averages with B̃^j.
    """
    _check_step(bank.step, step)
    if ctx.method is Method.BDF1:
        mult = 1.0 / ctx.D
    else:
        mult = (1.0 - ctx.s) / ctx.D
    bank.slices[:bank.count] *= mult
    fresh = history_sum(weights, bank.live)
    if ctx.method is Method.BDF1:
        history = fresh
    else:
        history = 0.5 * (fresh + bank.last_history)
        bank.last_history = fresh
    return ctx.robin(ctx.alpha1, history)


def cq_commit(bank: AuxBankCQ, u_walls: np.ndarray) -> None:
    """Seed the diagonal φ^{j+1,j+1} with the new wall trace u^{j+1}."""
    _append(bank.slices, bank.count, u_walls)
    bank.count += 1


# ─────────────────────────── novel Padé ─────────────────────────────
def _check_rho(constants_rho: float, ctx: BoundaryContext) -> None:
    if not np.isclose(constants_rho, ctx.rho, rtol=1e-12, atol=0.0):
        raise ContractViolation(f"constants built for rho={constants_rho}, run has rho={ctx.rho}")


def np_boundary_step(ctx: BoundaryContext, bank: AuxBankNP, constants: NpRobinConstants,
                     step: int, u_prev_walls: np.ndarray | None = None) -> RobinData:
    """
    κ = α₁ϖ.  BDF1: B̃ = Σ_k Γ_k φ_k^{j,j} / D_m.  TR: the half-step history
    Σ_k (−b̄_k/2)[r_k P_m + 1]φ_k^{j,j} + Σ_k (Γ_k/ρ)(−s_m/D_m) u^j with
    r_k = (1−η̄_k²)/(1+η̄_k²) and P_m = (1−s_m)/D_m.
    """
    _check_step(bank.step, step)
    _check_rho(constants.rho, ctx)
    D = ctx.D
    if ctx.method is Method.BDF1:
        history = np.einsum("k,wkm->wm", constants.Gamma, bank.phi) / D
    else:
        if u_prev_walls is None:
            raise ContractViolation("TR novel-Padé step needs the u^j wall traces")
        r = (1.0 - constants.eta_bar_sq) / (1.0 + constants.eta_bar_sq)
        P = (1.0 - ctx.s) / D
        coef = -0.5 * constants.b_bar[:, None] * (r[:, None] * P[None, :] + 1.0)
        history = np.einsum("km,wkm->wm", coef, bank.phi)
        history = history + (constants.Gamma.sum() / ctx.rho) * (-ctx.s / D) * u_prev_walls
    return ctx.robin(ctx.alpha1 * constants.varpi, history)


def np_commit(ctx: BoundaryContext, bank: AuxBankNP, constants: NpRobinConstants,
              new_walls: np.ndarray, u_prev_walls: np.ndarray | None = None) -> None:
    """
    BDF1: φ_k ← (φ_k/D_m + u^{j+1}/ρ)/(1+η̄_k²).
    TR:   φ_k ← r_k P_m φ_k + (2/ρ)/(1+η̄_k²)·[v^{j+1} − (s_m/D_m) u^j].
    """
    D = ctx.D
    denom = (1.0 + constants.eta_bar_sq)[None, :, None]
    if ctx.method is Method.BDF1:
        bank.phi = (bank.phi / D + new_walls[:, None, :] / ctx.rho) / denom
    else:
        r = ((1.0 - constants.eta_bar_sq) / (1.0 + constants.eta_bar_sq))[None, :, None]
        P = (1.0 - ctx.s) / D
        drive = new_walls - (ctx.s / D) * u_prev_walls
        bank.phi = r * P * bank.phi + (2.0 / ctx.rho) * drive[:, None, :] / denom
    bank.step += 1


# ─────────────────────────── conventional Padé ──────────────────────
@dataclass(frozen=True)
class CpRobinConstants:
    rho: float
    eta_bar_sq: np.ndarray             # (M,)
    Gamma: np.ndarray                  # (M, nmodes)
    varpi: np.ndarray                  # (nmodes,)

    def denominator(self, s: np.ndarray) -> np.ndarray:
        """1 + s_m + η̄_k², shape (M, nmodes)."""
        return 1.0 + s[None, :] + self.eta_bar_sq[:, None]


def cp_robin_constants(table: PadeTable, ctx: BoundaryContext) -> CpRobinConstants:
    """Γ_{k,m} = −b̄_k/(1+s_m+η̄_k²), ϖ_m = b̄₀ + (1/ρ)Σ_kΓ_{k,m}."""
    base = np_robin_constants(table, ctx.rho)
    gamma = -base.b_bar[:, None] / (1.0 + ctx.s[None, :] + base.eta_bar_sq[:, None])
    varpi = base.b0_bar + gamma.sum(axis=0) / ctx.rho
    return CpRobinConstants(rho=ctx.rho, eta_bar_sq=base.eta_bar_sq, Gamma=gamma, varpi=varpi)


def cp_boundary_step(ctx: BoundaryContext, bank: AuxBankCP, constants: CpRobinConstants,
                     step: int) -> RobinData:
    """κ_m = α₁ϖ_m and B̃_m = Σ_k Γ_{k,m} φ_{k,m}^j (both one-step methods)."""
    _check_step(bank.step, step)
    _check_rho(constants.rho, ctx)
    history = np.einsum("km,wkm->wm", constants.Gamma, bank.phi)
    return ctx.robin(ctx.alpha1 * constants.varpi, history)


def cp_commit(ctx: BoundaryContext, bank: AuxBankCP, constants: CpRobinConstants,
              new_walls: np.ndarray) -> None:
    """
    BDF1: φ ← (φ + u^{j+1}/ρ)/(1+s+η̄²).
    TR:   φ ← [(1−s−η̄²)φ + (2/ρ)v^{j+1}]/(1+s+η̄²).
    """
    denom = constants.denominator(ctx.s)[None]
    drive = new_walls[:, None, :] / ctx.rho
    if ctx.method is Method.BDF1:
        bank.phi = (bank.phi + drive) / denom
    else:
        bank.phi = ((2.0 - denom) * bank.phi + 2.0 * drive) / denom
    bank.step += 1


# ─────────────────────────── high-frequency ─────────────────────────
def hf_boundary_step(ctx: BoundaryContext, history: TraceHistory, half: CqTable,
                     minus_half: CqTable, step: int) -> RobinData:
    """κ_m = α₁(1 + s_m/2) and B̃_m = B̃_{m,1/2} + (s_m/2)·B̃_{m,−1/2}."""
    _check_step(history.step, step)
    b_half = history_sum(half, history.live)
    b_minus = history_sum(minus_half, history.live)
    return ctx.robin(ctx.alpha1 * (1.0 + 0.5 * ctx.s), b_half + 0.5 * ctx.s * b_minus)


def hf_commit(history: TraceHistory, walls: np.ndarray) -> None:
    _append(history.traces, history.count, walls)
    history.count += 1


# ─────────────────────────── dispatch ───────────────────────────────
class TransparentBoundary(ABC):
    """One scheme's banks and tables, behind the emit/commit protocol."""

    def __init__(self, scheme: SchemeSpec, ctx: BoundaryContext):
        self.scheme = scheme
        self.ctx = ctx
        self.log = logging.getLogger(self.__class__.__name__)

    @property
    @abstractmethod
    def kappa(self) -> np.ndarray:
        """Per-mode Robin coefficient; constant over the run."""

    @property
    @abstractmethod
    def step(self) -> int:
        ...

    @abstractmethod
    def emit(self, u_prev_walls: np.ndarray) -> RobinData:
        ...

    @abstractmethod
    def commit(self, new_walls: np.ndarray, u_prev_walls: np.ndarray) -> None:
        """new_walls is u^{j+1} (BDF1) or v^{j+1} (TR)."""


class CqBoundary(TransparentBoundary):
    def __init__(self, scheme, ctx, nt: int, u0_walls: np.ndarray):
        super().__init__(scheme, ctx)
        self.weights = cq_weights(ctx.method, 0.5, max(nt, 1))
        self.bank = AuxBankCQ.create(nt, u0_walls)

    @property
    def kappa(self):
        return np.full(self.ctx.nmodes, self.ctx.alpha1)

    @property
    def step(self):
        return self.bank.step

    def emit(self, u_prev_walls):
        return cq_boundary_step(self.ctx, self.bank, self.weights, self.step)

    def commit(self, new_walls, u_prev_walls):
        # the diagonal is always the field itself, so TR seeds u^{j+1} = 2v^{j+1} − u^j
        if self.ctx.method is Method.TR:
            new_walls = 2.0 * new_walls - u_prev_walls
        cq_commit(self.bank, new_walls)


class NpBoundary(TransparentBoundary):
    def __init__(self, scheme, ctx):
        super().__init__(scheme, ctx)
        self.constants = np_robin_constants(pade_sqrt_table(scheme.pade_order), ctx.rho)
        self.bank = AuxBankNP.create(scheme.pade_order, ctx.nmodes)

    @property
    def kappa(self):
        return np.full(self.ctx.nmodes, self.ctx.alpha1 * self.constants.varpi)

    @property
    def step(self):
        return self.bank.step

    def emit(self, u_prev_walls):
        return np_boundary_step(self.ctx, self.bank, self.constants, self.step, u_prev_walls)

    def commit(self, new_walls, u_prev_walls):
        np_commit(self.ctx, self.bank, self.constants, new_walls, u_prev_walls)


class CpBoundary(TransparentBoundary):
    def __init__(self, scheme, ctx):
        super().__init__(scheme, ctx)
        self.constants = cp_robin_constants(pade_sqrt_table(scheme.pade_order), ctx)
        self.bank = AuxBankCP.create(scheme.pade_order, ctx.nmodes)

    @property
    def kappa(self):
        return self.ctx.alpha1 * self.constants.varpi

    @property
    def step(self):
        return self.bank.step

    def emit(self, u_prev_walls):
        return cp_boundary_step(self.ctx, self.bank, self.constants, self.step)

    def commit(self, new_walls, u_prev_walls):
        cp_commit(self.ctx, self.bank, self.constants, new_walls)


class HfBoundary(TransparentBoundary):
    def __init__(self, scheme, ctx, nt: int, u0_walls: np.ndarray):
        super().__init__(scheme, ctx)
        n = max(nt, 1)
        self.half = cq_weights(ctx.method, 0.5, n)
        self.minus_half = cq_weights(ctx.method, -0.5, n)
        first = u0_walls if ctx.method is Method.BDF1 else np.zeros_like(u0_walls)
        self.history = TraceHistory.create(nt, first)

    @property
    def kappa(self):
        return self.ctx.alpha1 * (1.0 + 0.5 * self.ctx.s)

    @property
    def step(self):
        return self.history.step

    def emit(self, u_prev_walls):
        return hf_boundary_step(self.ctx, self.history, self.half, self.minus_half, self.step)

    def commit(self, new_walls, u_prev_walls):
        hf_commit(self.history, new_walls)


def make_boundary(scheme: SchemeSpec, ctx: BoundaryContext, nt: int,
                  u0_walls: np.ndarray) -> TransparentBoundary:
    if scheme.method is not ctx.method:
        raise ContractViolation(f"scheme method {scheme.method.name} != time grid {ctx.method.name}")
    if scheme.family is Family.CQ:
        return CqBoundary(scheme, ctx, nt, u0_walls)
    if scheme.family is Family.NP:
        return NpBoundary(scheme, ctx)
    if scheme.family is Family.CP:
        return CpBoundary(scheme, ctx)
    return HfBoundary(scheme, ctx, nt, u0_walls)
