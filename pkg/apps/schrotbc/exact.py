# apps/schrotbc/exact.py
"""
Closed-form solutions of i∂_t u + ∂²_{x₁}u + β∇²_⊥u = 0 used as references:
Fourier-chirped-Gaussian (FCG) and Fourier-Hermite-Gaussian (FHG) profiles.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import special

from apps.schrotbc.errors import ContractViolation
from apps.schrotbc.models import DomainSpec, ProfileFamily, parse_enum
from apps.schrotbc.specfun import TensorGrid, hermite_eval

PRESET_A = (1 / 2.5, 1 / 2.3, 1 / 2.2, 1 / 2.4)
PRESET_SIGNS = (+1, -1, +1, -1)
PRESET_K = (+2, -2, +4, -4)
PRESET_M = (1, 2, 1, 2)
PRESET_CHIRP = 0.5
PRESET_AMPLITUDE = 2.0
PRESET_SPEEDS = (4.0, 8.0, 12.0, 16.0)
PRESET_TERMS = {"I": 2, "II": 4}


@dataclass(frozen=True)
class ProfileSpec:
    family: ProfileFamily
    a: tuple[float, ...]
    signs: tuple[int, ...]
    K: tuple[int, ...]
    b: tuple[float, ...] = ()          # FCG chirps
    m: tuple[int, ...] = ()            # FHG orders
    amplitude: float = PRESET_AMPLITUDE
    c0: float = 4.0
    dim: int = 2

    def __post_init__(self):
        n = len(self.a)
        extra = self.b if self.family is ProfileFamily.FCG else self.m
        if n == 0 or any(len(v) != n for v in (self.signs, self.K, extra)):
            raise ContractViolation("profile term arrays must share one non-zero length")
        if any(a <= 0 for a in self.a):
            raise ContractViolation(f"widths a_j must be positive, got {self.a}")
        if any(m < 0 for m in self.m):
            raise ContractViolation(f"Hermite orders must be >= 0, got {self.m}")
        if self.dim not in (2, 3):
            raise ContractViolation(f"dim must be 2 or 3, got {self.dim}")

    @property
    def terms(self) -> int:
        return len(self.a)

    @property
    def speeds(self) -> tuple[float, ...]:
        return tuple(s * self.c0 for s in self.signs)

    def zeta(self, domain: DomainSpec) -> np.ndarray:
        """ζ_j per transverse direction, shape (terms, dim−1); ζ_p = (π/d_p)K_j."""
        return np.array([[np.pi / h * K for h in domain.d] for K in self.K])


def profile_preset(family, kind: str, c0: float, dim: int = 2) -> ProfileSpec:
    family = parse_enum(ProfileFamily, family)
    kind = str(kind).strip().upper()
    if kind not in PRESET_TERMS:
        raise ContractViolation(f"unknown profile type {kind!r} (expected I or II)")
    if float(c0) not in PRESET_SPEEDS:
        raise ContractViolation(f"c0 must be one of {PRESET_SPEEDS}, got {c0}")
    if family is ProfileFamily.FHG and dim == 3:
        raise ContractViolation("3D presets exist only for the FCG family")
    n = PRESET_TERMS[kind]
    common = dict(family=family, a=PRESET_A[:n], signs=PRESET_SIGNS[:n], K=PRESET_K[:n],
                  amplitude=PRESET_AMPLITUDE, c0=float(c0), dim=dim)
    if family is ProfileFamily.FCG:
        return ProfileSpec(b=(PRESET_CHIRP,) * n, **common)
    return ProfileSpec(m=PRESET_M[:n], **common)


# ─────────────────────────── envelopes ──────────────────────────────
def chirped_gaussian(x, t: float, a: float, b: float):
    """𝒢(x,t;a,b) = (1+4i(a+ib)t)^{−1/2} exp(−(a+ib)x²/(1+4i(a+ib)t))."""
    A = a + 1j * b
    q = 1.0 + 4j * A * t
    return np.exp(-A * np.asarray(x) ** 2 / q) / np.sqrt(q)


def hermite_norm(m: int, a: float) -> float:
    """γ_m = (2^m m! √π (2a)^{−1/2})^{1/2}, via log-gamma."""
    log_sq = m * np.log(2.0) + special.gammaln(m + 1) + 0.5 * np.log(np.pi) - 0.5 * np.log(2.0 * a)
    return float(np.exp(0.5 * log_sq))


def hermite_gaussian(x, t: float, a: float, m: int):
    """𝒢_m(x,t;a) with 1/μ = 1/a + 4it = (w/a)e^{iθ}, w = √(1+(4at)²)."""
    x = np.asarray(x, dtype=float)
    w = np.sqrt(1.0 + (4.0 * a * t) ** 2)
    theta = np.arctan(4.0 * a * t)
    mu = a / (1.0 + 4j * a * t)
    herm = hermite_eval(m, np.sqrt(2.0 * a) * x / w)
    return herm * np.sqrt(mu / a) * np.exp(-mu * x ** 2 - 1j * m * theta) / hermite_norm(m, a)


def _carrier(x1, t: float, c: float):
    return np.exp(0.5j * c * x1 - 0.25j * c * c * t)


def _transverse(perp: Sequence[np.ndarray], t: float, zeta: np.ndarray, beta: int):
    phase = sum(z * x for z, x in zip(zeta, perp)) - beta * float(np.sum(zeta ** 2)) * t
    return np.exp(1j * phase)


def _check_points(spec: ProfileSpec, points: Sequence[np.ndarray]) -> None:
    if len(points) != spec.dim:
        raise ContractViolation(f"{spec.dim}D profile evaluated at {len(points)}D points")


def fcg_eval(spec: ProfileSpec, points: Sequence[np.ndarray], t: float, domain: DomainSpec):
    if spec.family is not ProfileFamily.FCG:
        raise ContractViolation("fcg_eval needs an FCG profile")
    _check_points(spec, points)
    x1, *perp = points
    out = 0.0
    for a, b, c, zeta in zip(spec.a, spec.b, spec.speeds, spec.zeta(domain)):
        out = out + (chirped_gaussian(x1 - c * t, t, a, b) * _carrier(x1, t, c)
                     * _transverse(perp, t, zeta, domain.beta))
    return spec.amplitude * out


def fhg_eval(spec: ProfileSpec, points: Sequence[np.ndarray], t: float, domain: DomainSpec):
    if spec.family is not ProfileFamily.FHG:
        raise ContractViolation("fhg_eval needs an FHG profile")
    _check_points(spec, points)
    x1, *perp = points
    out = 0.0
    for a, m, c, zeta in zip(spec.a, spec.m, spec.speeds, spec.zeta(domain)):
        out = out + (hermite_gaussian(x1 - c * t, t, a, m) * _carrier(x1, t, c)
                     * _transverse(perp, t, zeta, domain.beta))
    return spec.amplitude * out


Evaluator = Callable[[Sequence[np.ndarray], float], np.ndarray]


def make_evaluator(spec: ProfileSpec, domain: DomainSpec) -> Evaluator:
    """Bind a profile to a domain: evaluator(physical_points, t)."""
    if spec.dim != domain.dim:
        raise ContractViolation(f"profile dim {spec.dim} != domain dim {domain.dim}")
    kernel = fcg_eval if spec.family is ProfileFamily.FCG else fhg_eval

    def evaluate(points, t):
        return np.asarray(kernel(spec, points, t, domain), dtype=complex)
    return evaluate


# ─────────────────────────── energy ─────────────────────────────────
def domain_integral(values: np.ndarray, domain: DomainSpec, grid: TensorGrid) -> complex:
    """∫_Ω f by LGL × periodic trapezoid quadrature, scaled by the Jacobians."""
    if values.shape != grid.shape:
        raise ContractViolation(f"values shape {values.shape} != grid {grid.shape}")
    return domain.jacobian * np.sum(grid.quadrature_weights() * values)


def energy_content(source, domain: DomainSpec, grid: TensorGrid, t: float = 0.0,
                   reference: np.ndarray | None = None) -> float:
    """
    E(t) = ∫|G(t)|² / ∫|G(0)|².  `source` is an evaluator, or samples at t with
    `reference` the samples at t=0.
    """
    if callable(source):
        points = domain.to_physical(grid.reference_points())
        now, start = source(points, t), source(points, 0.0)
    else:
        if reference is None:
            raise ContractViolation("sampled energy content needs the t=0 reference samples")
        now, start = np.asarray(source), np.asarray(reference)
    denom = domain_integral(np.abs(start) ** 2, domain, grid).real
    if denom <= 0.0:
        raise ContractViolation("energy content undefined for a zero initial field")
    return float(domain_integral(np.abs(now) ** 2, domain, grid).real / denom)
