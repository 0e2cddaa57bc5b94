# apps/schrotbc/config.py
"""Run descriptions (pydantic) and the tabulated experiment protocols."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from pydantic import (BaseModel, ConfigDict, Field, ValidationError, field_serializer,
                      field_validator, model_validator)

from apps.schrotbc.errors import ConfigError
from apps.schrotbc.exact import (PRESET_A, PRESET_AMPLITUDE, PRESET_CHIRP, PRESET_K, PRESET_M,
                                 PRESET_SIGNS, PRESET_SPEEDS, PRESET_TERMS, ProfileSpec,
                                 profile_preset)
from apps.schrotbc.models import (DomainSpec, Family, Method, ProfileFamily, SchemeSpec,
                                  TimeGrid, parse_enum)
from apps.schrotbc.specfun import TensorGrid, lgl_grid

log = logging.getLogger(__name__)

DESK_GRID = {2: 64, 3: 32}
FULL_GRID = {2: 200, 3: 100}
FULL_NT = 5001
DESK_NT = {"III": 1025, "V": 257}
# first-order runs leave the pre-asymptotic range only from Nt = 2^10 on the desk grid
SWEEP_EXPONENTS = {
    (Method.TR, False): range(8, 13), (Method.BDF1, False): range(10, 15),
    (Method.TR, True): range(8, 17), (Method.BDF1, True): range(10, 17),
}
SCHEMES_2D = ("CQ", "NP20", "NP50", "CP20", "CP50", "HF")


def _cast(cls, v):
    try:
        return parse_enum(cls, v)
    except ValueError as exc:
        raise ValueError(str(exc)) from None


class ProfileConfig(BaseModel):
    family: ProfileFamily = ProfileFamily.FCG
    kind: str = "I"
    c0: float = 4.0

    @field_validator("family", mode="before")
    def _cast_family(cls, v):
        return _cast(ProfileFamily, v)

    @field_validator("kind", mode="before")
    def _cast_kind(cls, v):
        kind = str(v).strip().upper()
        if kind not in PRESET_TERMS:
            raise ValueError(f"profile type must be one of {sorted(PRESET_TERMS)}, got {v!r}")
        return kind

    @field_serializer("family")
    def _dump_family(self, v: ProfileFamily) -> str:
        return v.name

    @field_validator("c0")
    def _check_speed(cls, v):
        if v not in PRESET_SPEEDS:
            raise ValueError(f"c0 must be one of {PRESET_SPEEDS}, got {v}")
        return v

    @classmethod
    def from_label(cls, label: str, c0: float = 4.0) -> "ProfileConfig":
        """'fcg-i', 'fhg-ii', ..."""
        family, _, kind = label.strip().partition("-")
        if not kind:
            raise ValueError(f"profile label must look like fcg-i, got {label!r}")
        return cls(family=family, kind=kind, c0=c0)

    @property
    def label(self) -> str:
        return f"{self.family.name.lower()}-{self.kind.lower()}"


class DomainConfig(BaseModel):
    x_l: float = -10.0
    x_r: float = 10.0
    d: Optional[list[float]] = None    # transverse half-widths, default π each
    beta: int = 1

    @model_validator(mode="after")
    def _check_extent(cls, m):
        if not m.x_l < m.x_r:
            raise ValueError(f"need x_l < x_r, got ({m.x_l}, {m.x_r})")
        if m.beta not in (1, -1):
            raise ValueError(f"beta must be +1 or -1, got {m.beta}")
        if m.d is not None and any(h <= 0 for h in m.d):
            raise ValueError(f"half-widths must be positive, got {m.d}")
        return m

    def build(self, dim: int) -> DomainSpec:
        d = self.d if self.d is not None else [math.pi] * (dim - 1)
        if len(d) != dim - 1:
            raise ConfigError(f"{dim}D domain needs {dim - 1} half-widths, got {len(d)}")
        return DomainSpec(self.x_l, self.x_r, tuple(d), self.beta)


@dataclass(frozen=True)
class RunSetup:
    domain: DomainSpec
    timegrid: TimeGrid
    scheme: SchemeSpec
    grid: TensorGrid
    profile: ProfileSpec


class RunConfig(BaseModel):
    scheme: str = "NP50"
    method: Method = Method.TR
    pade_order: Optional[int] = Field(None, ge=1)
    dim: int = Field(2, ge=2, le=3)
    domain: DomainConfig = Field(default_factory=DomainConfig)
    n_lgl: int = Field(DESK_GRID[2], ge=4)      # LGL points, polynomial order n_lgl − 1
    n_fourier: int = Field(DESK_GRID[2], ge=2)  # points per periodic direction
    tmax: float = Field(5.0, gt=0)
    nt: int = Field(1025, ge=2)
    nt_set: list[int] = Field(default_factory=list)
    profile: ProfileConfig = Field(default_factory=ProfileConfig)
    out: Optional[str] = None
    snapshot_every: int = Field(0, ge=0)
    check_robin: bool = False

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="before")
    def _expand_grid(cls, data: Any):
        if isinstance(data, dict) and "grid" in data:
            data = dict(data)
            n = data.pop("grid")
            data.setdefault("n_lgl", n)
            data.setdefault("n_fourier", n)
        return data

    @field_validator("method", mode="before")
    def _cast_method(cls, v):
        return _cast(Method, v)

    @field_serializer("method")
    def _dump_method(self, v: Method) -> str:
        return v.name

    @field_validator("scheme", mode="before")
    def _norm_scheme(cls, v):
        return str(v).strip().upper()

    @field_validator("n_fourier")
    def _check_fourier(cls, v):
        if v % 2:
            raise ValueError(f"Fourier size must be even, got {v}")
        return v

    @field_validator("nt_set")
    def _check_nt_set(cls, v):
        if any(n < 2 for n in v):
            raise ValueError(f"every Nt in the sweep must be >= 2, got {v}")
        return sorted(set(v))

    @model_validator(mode="after")
    def _check_run(cls, m):
        spec = m.scheme_spec()
        if m.dim == 3 and spec.family is not Family.NP:
            raise ValueError(f"3D runs admit only NP schemes, got {spec.label}")
        if m.dim == 3 and m.profile.family is not ProfileFamily.FCG:
            raise ValueError("3D runs use the FCG profile only")
        n_terms = PRESET_TERMS[m.profile.kind]
        if max(abs(k) for k in PRESET_K[:n_terms]) >= m.n_fourier // 2:
            raise ValueError(f"profile modes K={PRESET_K[:n_terms]} not resolved by "
                             f"{m.n_fourier} Fourier points")
        return m

    # ---------- derived ----
    def scheme_spec(self) -> SchemeSpec:
        return SchemeSpec.parse(self.scheme, self.method, self.pade_order)

    def with_updates(self, **changes) -> "RunConfig":
        """Re-validated copy; used by sweeps and CLI overrides."""
        data = self.model_dump()
        data.update(changes)
        return RunConfig.model_validate(data)

    def build(self) -> RunSetup:
        domain = self.domain.build(self.dim)
        scheme = self.scheme_spec()
        grid = TensorGrid(lgl_grid(self.n_lgl - 1), (self.n_fourier,) * (self.dim - 1))
        profile = profile_preset(self.profile.family, self.profile.kind, self.profile.c0, self.dim)
        return RunSetup(domain=domain, timegrid=TimeGrid(self.tmax, self.nt, self.method),
                        scheme=scheme, grid=grid, profile=profile)


def load_config(path: str | Path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return RunConfig.model_validate_json(text)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}", exc.errors(include_url=False)) from exc


# ─────────────────────────── tabulated protocols ────────────────────
PRESET_TABLES = ("I", "II", "III", "IV", "V")


def sweep_levels(method, full_scale: bool = False) -> list[int]:
    """Nt values of the convergence protocol for one one-step method."""
    return [2 ** k for k in SWEEP_EXPONENTS[(_cast(Method, method), full_scale)]]


def preset_config(table: str, full_scale: bool = False, **overrides) -> RunConfig:
    """RunConfig for the evolution (III, V) or convergence (IV) protocol."""
    table = table.strip().upper()
    if table not in ("III", "IV", "V"):
        raise ConfigError(f"table {table!r} has no run protocol (expected III, IV or V)")
    dim = 3 if table == "V" else 2
    n = FULL_GRID[dim] if full_scale else DESK_GRID[dim]
    data: dict[str, Any] = dict(dim=dim, n_lgl=n, n_fourier=n, tmax=5.0)
    if table == "IV":
        data["nt_set"] = sweep_levels(overrides.get("method") or Method.TR, full_scale)
        data["nt"] = data["nt_set"][0]
    else:
        data["nt"] = FULL_NT if full_scale else DESK_NT[table]
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"invalid preset {table}", exc.errors(include_url=False)) from exc


def describe_preset(table: str, full_scale: bool = False) -> dict:
    """Parameter block of one table, as printed by `presets`."""
    table = table.strip().upper()
    if table in ("I", "II"):
        family = ProfileFamily.FCG if table == "I" else ProfileFamily.FHG
        block = {"family": family.name, "amplitude": PRESET_AMPLITUDE, "speeds": list(PRESET_SPEEDS),
                 "zeta": "(pi/d)*K_j", "types": {}}
        for kind, n in PRESET_TERMS.items():
            entry = {"n": n, "a": list(PRESET_A[:n]), "signs": list(PRESET_SIGNS[:n]),
                     "K": list(PRESET_K[:n])}
            if family is ProfileFamily.FCG:
                entry["b"] = [PRESET_CHIRP] * n
            else:
                entry["m"] = list(PRESET_M[:n])
            block["types"][kind] = entry
        return block
    if table not in PRESET_TABLES:
        raise ConfigError(f"unknown table {table!r} (expected one of {PRESET_TABLES})")

    cfg = preset_config(table, full_scale)
    domain = cfg.domain.build(cfg.dim)
    extent = " x ".join([f"({domain.x_l:g},{domain.x_r:g})"] + [f"[-{h:.6g},{h:.6g})" for h in domain.d])
    block = {"domain": extent, "tmax": cfg.tmax,
             "lgl_points": " x ".join([str(cfg.n_lgl)] + [str(cfg.n_fourier)] * (cfg.dim - 1)),
             "scale": "full" if full_scale else "desk"}
    if cfg.nt_set:
        block["nt_set"] = cfg.nt_set
        block["nt_set_bdf1"] = sweep_levels(Method.BDF1, full_scale)
        block["dt"] = "tmax/(Nt-1)"
    else:
        block["nt"] = cfg.nt
        block["dt"] = cfg.tmax / (cfg.nt - 1)
    block["schemes"] = ["NP20", "NP50"] if cfg.dim == 3 else list(SCHEMES_2D)
    return block
