# apps/schrotbc/sweep.py
"""Multi-run studies: Δt-convergence sweeps and boundary-map comparisons."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from apps.schrotbc.config import SCHEMES_2D, RunConfig
from apps.schrotbc.errors import ConfigError
from apps.schrotbc.evolve import RunResult, run
from apps.schrotbc.metrics import SlopeFit, fit_slope
from apps.schrotbc.settings import get_settings
from apps.schrotbc.writers import dump_json, run_writer

log = logging.getLogger(__name__)

MONOTONE_SLACK = 1.5
SCHEMES_3D = ("NP20", "NP50")


def execute(config: RunConfig, out_dir: Optional[str | Path] = None) -> RunResult:
    """One simulation, writing its own directory when out_dir is given."""
    if out_dir is None:
        return run(config)
    with run_writer(out_dir, snapshots=config.snapshot_every > 0) as writer:
        return run(config, writer)


def _execute_all(configs: Sequence[RunConfig], dirs: Sequence[Optional[Path]],
                 threads: Optional[int]) -> list[RunResult]:
    workers = min(threads or get_settings().threads, len(configs))
    if workers <= 1:
        return [execute(c, d) for c, d in zip(configs, dirs)]
    log.info("POOL-START runs=%d workers=%d", len(configs), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(execute, c, d) for c, d in zip(configs, dirs)]
        return [f.result() for f in futures]


def _subdir(out: Optional[Path], name: str) -> Optional[Path]:
    return None if out is None else out / name


# ─────────────────────────── convergence ────────────────────────────
@dataclass
class SweepReport:
    label: str
    nts: list[int]
    dts: np.ndarray
    errors: np.ndarray                 # max_j e(t_j) per Nt
    fit: SlopeFit
    monotone: bool

    def summary(self, config: RunConfig) -> dict:
        return {
            "scheme": self.label,
            "config": config.model_dump(mode="json"),
            "points": [{"nt": n, "dt": float(dt), "max_error": float(e), "in_fit": bool(u)}
                       for n, dt, e, u in zip(self.nts, self.dts, self.errors, self.fit.used)],
            "slope": self.fit.slope,
            "intercept": self.fit.intercept,
            "monotone": self.monotone,
        }


def is_monotone(errors: np.ndarray, used: np.ndarray, slack: float = MONOTONE_SLACK) -> bool:
    """Maxima non-increasing in Nt (up to `slack`) over the pre-plateau points."""
    e = np.asarray(errors)[np.asarray(used)]
    return bool(np.all(e[1:] <= slack * e[:-1]))


def convergence_sweep(config: RunConfig, out: Optional[str | Path] = None,
                      threads: Optional[int] = None) -> SweepReport:
    nts = list(config.nt_set)
    if len(nts) < 3:
        raise ConfigError(f"a convergence sweep needs at least 3 Nt values, got {nts}")
    out = Path(out) if out is not None else None
    configs = [config.with_updates(nt=n, nt_set=[]) for n in nts]
    label = configs[0].scheme_spec().label
    log.info("SWEEP-START scheme=%s nts=%s", label, nts)

    results = _execute_all(configs, [_subdir(out, f"nt_{n:06d}") for n in nts], threads)
    dts = np.array([r.dt for r in results])
    errors = np.array([r.max_error for r in results])
    fit = fit_slope(dts, errors)
    monotone = is_monotone(errors, fit.used)
    if not monotone:
        log.warning("SWEEP-NONMONOTONE scheme=%s errors=%s", label, errors.tolist())

    report = SweepReport(label=label, nts=nts, dts=dts, errors=errors, fit=fit, monotone=monotone)
    if out is not None:
        dump_json(out / "summary.json", report.summary(config))
        dump_json(out / "timing.json", {"wall_clock_s": {str(n): r.wall_clock
                                                        for n, r in zip(nts, results)}})
    log.info("SWEEP-DONE scheme=%s slope=%.4f used=%d/%d", label, fit.slope,
             int(fit.used.sum()), len(nts))
    return report


# ─────────────────────────── comparison ─────────────────────────────
@dataclass
class ComparisonReport:
    method: str
    results: dict[str, RunResult]

    def deviation(self, scheme: str, reference: str = "CQ") -> Optional[float]:
        """max_t |e_scheme(t) − e_reference(t)|, None without the reference run."""
        if reference not in self.results:
            return None
        return float(np.max(np.abs(self.results[scheme].errors - self.results[reference].errors)))

    def summary(self) -> dict:
        rows = {}
        for name, r in self.results.items():
            rows[name] = {"label": r.label, "max_error": r.max_error,
                          "energy_final": float(r.energy[-1]),
                          "energy_exact_final": float(r.energy_exact[-1])}
            dev = self.deviation(name)
            if dev is not None:
                rows[name]["deviation_from_cq"] = dev
        return {"method": self.method, "schemes": rows}


def compare_schemes(config: RunConfig, out: Optional[str | Path] = None,
                    threads: Optional[int] = None,
                    schemes: Optional[Sequence[str]] = None) -> ComparisonReport:
    """Run every boundary map for one one-step method on the same profile and grid."""
    if schemes is None:
        schemes = SCHEMES_3D if config.dim == 3 else SCHEMES_2D
    out = Path(out) if out is not None else None
    configs = [config.with_updates(scheme=s, pade_order=None, nt_set=[]) for s in schemes]
    log.info("COMPARE-START method=%s schemes=%s", config.method.name, list(schemes))

    results = _execute_all(configs, [_subdir(out, s) for s in schemes], threads)
    report = ComparisonReport(method=config.method.name, results=dict(zip(schemes, results)))
    if out is not None:
        dump_json(out / "comparison.json", report.summary())
    log.info("COMPARE-DONE %s", " ".join(f"{s}={r.max_error:.3e}" for s, r in report.results.items()))
    return report
