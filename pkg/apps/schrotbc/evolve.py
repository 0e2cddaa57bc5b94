# apps/schrotbc/evolve.py
"""
Time stepping of the interior problem with transparent walls.

Per step the interior equation is divided through by iρ so every scheme and
both one-step methods share one mode template,

    [−α₁⁻²∂²_{y₁} + D_m] X = u^j,   D_m = 1 + s_m,

with X = u^{j+1} (BDF1) or the staggered sample v^{j+1} (TR, u^{j+1} = 2v^{j+1} − u^j).
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from apps.schrotbc.errors import ContractViolation, DiagnosticError, InstabilityError
from apps.schrotbc.exact import domain_integral, make_evaluator
from apps.schrotbc.galerkin import (ModeSolver, assemble_rhs, build_basis, build_lifting,
                                    build_operator, reconstruct_mode, relative_robin_residual,
                                    wall_values)
from apps.schrotbc.metrics import ErrorProbe
from apps.schrotbc.models import DomainSpec, Family, Method, RobinData, SchemeSpec, TimeGrid
from apps.schrotbc.specfun import CoeffField, TensorGrid
from apps.schrotbc.tbc_maps import BoundaryContext, TransparentBoundary, make_boundary

GROWTH_CAP = 1e6
WALL_TRACE_TOL = 1e-10
ROBIN_TOL = 1e-9

__all__ = ["DomainSpec", "TimeGrid", "SolverState", "Solver", "RunResult", "simulate", "run"]


@dataclass
class SolverState:
    step: int
    field: CoeffField                  # u^j
    boundary: TransparentBoundary
    initial_norm: float
    staggered: Optional[np.ndarray] = None   # v^j coefficients (TR), v⁰ = 0
    robin: Optional[RobinData] = None        # data used for the last solve

    @property
    def coeffs(self) -> np.ndarray:
        return self.field.coeffs


class Solver:
    def __init__(self, domain: DomainSpec, timegrid: TimeGrid, scheme: SchemeSpec,
                 grid: TensorGrid, check_robin: bool = False):
        self.log = logging.getLogger("Solver")
        if grid.dim != domain.dim:
            raise ContractViolation(f"grid is {grid.dim}D but the domain is {domain.dim}D")
        if domain.dim == 3 and scheme.family is not Family.NP:
            raise ContractViolation(f"3D runs support only novel-Padé maps, got {scheme.label}")
        if scheme.method is not timegrid.method:
            raise ContractViolation("scheme and time grid disagree on the one-step method")
        if grid.lgl.order < 3:
            raise ContractViolation(f"Legendre order must be >= 3, got {grid.lgl.order}")
        self.domain = domain
        self.timegrid = timegrid
        self.scheme = scheme
        self.grid = grid
        self.check_robin = check_robin
        self.ctx = BoundaryContext.from_run(domain, timegrid, grid)
        self._kappa = None

    # ---------- setup ----
    def _prepare(self, kappa: np.ndarray) -> None:
        if self._kappa is not None and np.array_equal(kappa, self._kappa):
            return
        N = self.grid.lgl.order
        self.basis = build_basis(kappa, N)
        self.lifting = build_lifting(kappa)
        self.ops = build_operator(self.basis)
        self.modes = ModeSolver(self.ops, self.ctx.alpha1, self.ctx.D)
        self._kappa = kappa
        self.log.info("SETUP scheme=%s modes=%d N=%d rho=%.6g", self.scheme.label,
                      self.grid.nmodes, N, self.ctx.rho)

    def init_state(self, u0) -> SolverState:
        """u0: samples on the tensor grid or an evaluator of the physical points."""
        points = self.domain.to_physical(self.grid.reference_points())
        samples = np.asarray(u0(points) if callable(u0) else u0, dtype=complex)
        if samples.shape != self.grid.shape:
            raise ContractViolation(f"initial samples {samples.shape} != grid {self.grid.shape}")

        field = CoeffField(self.grid.analysis(samples), self.grid)
        norm = field.norm()
        wall = max(np.abs(samples[0]).max(), np.abs(samples[-1]).max())
        if wall > WALL_TRACE_TOL * norm:
            self.log.warning("WALL-TRACE u0 wall=%.3e exceeds %.0e*norm=%.3e; proceeding",
                             wall, WALL_TRACE_TOL, norm)

        boundary = make_boundary(self.scheme, self.ctx, self.timegrid.nt,
                                 wall_values(field.coeffs.T))
        self._prepare(boundary.kappa)
        staggered = np.zeros_like(field.coeffs) if self.ctx.method is Method.TR else None
        return SolverState(step=0, field=field, boundary=boundary, initial_norm=norm,
                           staggered=staggered)

    # ---------- public ----
    def step(self, state: SolverState) -> SolverState:
        """Advance j → j+1; the boundary banks are advanced in place."""
        if state.boundary.step != state.step:
            raise ContractViolation(f"state at step {state.step}, boundary at {state.boundary.step}")
        u = state.coeffs.T                                  # (nmodes, N+1)
        u_walls = wall_values(u)
        robin = state.boundary.emit(u_walls)

        rhs = assemble_rhs(u, robin.history, self.ctx.D, self.basis, self.ctx.alpha1, self.lifting)
        w_hat = self.modes.solve(rhs)
        x = reconstruct_mode(w_hat, robin.history, self.basis, self.ctx.alpha1, self.lifting)

        if self.check_robin:
            res = relative_robin_residual(x, robin, self.ctx.alpha1)
            if res > ROBIN_TOL:
                raise DiagnosticError(f"Robin residual {res:.3e} at step {state.step + 1}",
                                      {"step": state.step + 1, "residual": res})

        state.boundary.commit(wall_values(x), u_walls)
        if self.ctx.method is Method.TR:
            u_next, staggered = 2.0 * x - u, x.T
        else:
            u_next, staggered = x, None

        field = CoeffField(np.ascontiguousarray(u_next.T), self.grid)
        self._check_growth(field, state.initial_norm, state.step + 1)
        return SolverState(step=state.step + 1, field=field, boundary=state.boundary,
                           initial_norm=state.initial_norm, staggered=staggered, robin=robin)

    def _check_growth(self, field: CoeffField, initial_norm: float, step: int) -> None:
        if not np.all(np.isfinite(field.coeffs)):
            raise InstabilityError(step, float("nan"), f"non-finite field at step {step}")
        norm = field.norm()
        if norm > GROWTH_CAP * initial_norm:
            raise InstabilityError(step, norm)


# ─────────────────────────── driver ─────────────────────────────────
@dataclass
class RunResult:
    label: str
    times: np.ndarray
    errors: np.ndarray
    energy: np.ndarray
    energy_exact: np.ndarray
    dt: float
    wall_clock: float = 0.0
    config: dict = field(default_factory=dict)
    slope: Optional[float] = None

    @property
    def max_error(self) -> float:
        return float(self.errors.max())

    def summary(self) -> dict:
        """Deterministic digest (no timings) for summary.json."""
        out = {
            "scheme": self.label,
            "config": self.config,
            "dt": self.dt,
            "steps": int(self.times.size - 1),
            "max_error": self.max_error,
            "final_error": float(self.errors[-1]),
            "energy_final": float(self.energy[-1]),
            "energy_exact_final": float(self.energy_exact[-1]),
            "energy_gap": float(abs(self.energy[-1] - self.energy_exact[-1])),
        }
        if self.slope is not None:
            out["slope"] = self.slope
        return out


def _close(writer) -> None:
    closer = getattr(writer, "close", None)
    if closer is not None:
        closer()


def simulate(setup, writer=None, check_robin: bool = False, snapshot_every: int = 0,
             config_echo: Optional[dict] = None) -> RunResult:
    """Integrate a built RunSetup, recording e(t_j) and E(t_j) at every level (Nt = 1 allowed)."""
    log = logging.getLogger("run")
    started = time.perf_counter()

    evaluator = make_evaluator(setup.profile, setup.domain)
    probe = ErrorProbe(evaluator, setup.domain, setup.grid)
    solver = Solver(setup.domain, setup.timegrid, setup.scheme, setup.grid,
                    check_robin=check_robin)
    state = solver.init_state(probe.initial)

    nt = setup.timegrid.nt
    times = setup.timegrid.times
    errors = np.zeros(nt)
    energy = np.ones(nt)
    energy_exact = np.ones(nt)

    def mass(values):
        return domain_integral(np.abs(values) ** 2, setup.domain, setup.grid).real

    start_samples = state.field.samples()
    num0, exact0 = mass(start_samples), mass(probe.initial)
    log.info("RUN-START scheme=%s nt=%d dt=%.6g grid=%s", setup.scheme.label, nt,
             setup.timegrid.dt, "x".join(map(str, setup.grid.shape)))

    report_every = max(1, (nt - 1) // 10)
    try:
        for j in range(nt):
            if j > 0:
                state = solver.step(state)
            samples = start_samples if j == 0 else state.field.samples()
            errors[j] = probe.error(samples, times[j])
            energy[j] = mass(samples) / num0 if num0 > 0 else 1.0
            energy_exact[j] = mass(probe.exact(times[j])) / exact0
            if writer is not None:
                writer.record_step(j, float(times[j]), float(errors[j]), float(energy[j]))
                if snapshot_every and j % snapshot_every == 0:
                    writer.record_snapshot(j, float(times[j]), samples, setup)
            if j % report_every == 0:
                log.debug("STEP j=%d t=%.4f e=%.3e E=%.4f", j, times[j], errors[j], energy[j])
    except BaseException:
        _close(writer)
        raise

    result = RunResult(label=setup.scheme.label, times=times, errors=errors, energy=energy,
                       energy_exact=energy_exact, dt=setup.timegrid.dt,
                       wall_clock=time.perf_counter() - started,
                       config=config_echo or {})
    log.info("RUN-DONE scheme=%s max_e=%.3e E_end=%.4f exact_E_end=%.4f wall=%.2fs",
             result.label, result.max_error, energy[-1], energy_exact[-1], result.wall_clock)
    if writer is not None:
        writer.finish(result)
    return result


def run(config, writer=None) -> RunResult:
    """Build and integrate one RunConfig."""
    return simulate(config.build(), writer, check_robin=config.check_robin,
                    snapshot_every=config.snapshot_every,
                    config_echo=config.model_dump(mode="json"))
