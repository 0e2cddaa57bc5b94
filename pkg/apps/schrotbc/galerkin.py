# apps/schrotbc/galerkin.py
"""
Boundary-adapted Legendre Galerkin machinery for one transverse mode at a time.

Mode arrays carry any leading axes (usually one per transverse mode) with the
Legendre / basis index last:

    u coefficients   (..., N+1)   degrees 0..N
    basis weights    (..., N−1)   φ_p = L_p + b_p L_{p+2}, p = 0..N−2
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from apps.schrotbc.errors import ContractViolation, PoleError, SingularSystemError
from apps.schrotbc.models import RobinData

log = logging.getLogger(__name__)


def legendre_norms(N: int) -> np.ndarray:
    """γ_k = 2/(2k+1), k = 0..N."""
    return 2.0 / (2.0 * np.arange(N + 1) + 1.0)


# ─────────────────────────── basis / lifting ────────────────────────
@dataclass(frozen=True)
class BoundaryBasis:
    kappa: np.ndarray
    order: int
    b: np.ndarray

    @property
    def size(self) -> int:
        return self.order - 1

    @property
    def norms(self) -> np.ndarray:
        return legendre_norms(self.order)

    @property
    def conversion(self) -> np.ndarray:
        """B with B[p, p] = 1 and B[p+2, p] = b_p, shape (..., N+1, N−1)."""
        n = self.size
        out = np.zeros((*self.b.shape[:-1], self.order + 1, n), dtype=complex)
        idx = np.arange(n)
        out[..., idx, idx] = 1.0
        out[..., idx + 2, idx] = self.b
        return out

    @property
    def quadrature(self) -> np.ndarray:
        return np.swapaxes(self.conversion, -1, -2)

    def to_legendre(self, w_hat: np.ndarray) -> np.ndarray:
        if w_hat.shape[-1] != self.size:
            raise ContractViolation(f"expected {self.size} basis weights, got {w_hat.shape[-1]}")
        out = np.zeros((*w_hat.shape[:-1], self.order + 1), dtype=complex)
        out[..., :-2] += w_hat
        out[..., 2:] += self.b * w_hat
        return out

    def project(self, f: np.ndarray) -> np.ndarray:
        """QΓf, i.e. g_p = γ_p f_p + b_p γ_{p+2} f_{p+2}."""
        if f.shape[-1] != self.order + 1:
            raise ContractViolation(f"expected {self.order + 1} Legendre coefficients, got {f.shape[-1]}")
        gf = self.norms * f
        return gf[..., :-2] + self.b * gf[..., 2:]


def build_basis(kappa, N: int) -> BoundaryBasis:
    """
    b_p = −(κ + p(p+1)/2)/(κ + (p+2)(p+3)/2), which makes every φ_p satisfy
    (∂−κ)φ_p = 0 at −1 and (∂+κ)φ_p = 0 at +1.
    """
    if N < 2:
        raise ContractViolation(f"basis needs order >= 2, got {N}")
    kappa = np.asarray(kappa, dtype=complex)
    p = np.arange(N - 1)
    den = kappa[..., None] + 0.5 * (p + 2) * (p + 3)
    if np.any(den == 0):
        raise PoleError("kappa sits on a pole of the basis recurrence", {"kappa": kappa.tolist()})
    b = -(kappa[..., None] + 0.5 * p * (p + 1)) / den
    return BoundaryBasis(kappa=kappa, order=N, b=b)


@dataclass(frozen=True)
class LiftingPair:
    """(L₀, L₁) coefficients of χ_l and χ_r, shape (..., 2)."""
    left: np.ndarray
    right: np.ndarray

    def field(self, alpha1: complex, history: np.ndarray) -> np.ndarray:
        """α₁(χ_l B̃_l − χ_r B̃_r), the degree-≤1 part carrying the wall data."""
        return alpha1 * (self.left * history[0][..., None] - self.right * history[1][..., None])


def build_lifting(kappa) -> LiftingPair:
    """χ_l = −L₀/(2κ) + L₁/(2(κ+1)),  χ_r = +L₀/(2κ) + L₁/(2(κ+1))."""
    kappa = np.asarray(kappa, dtype=complex)
    if np.any(kappa == 0) or np.any(kappa == -1):
        raise PoleError("lifting is singular for kappa in {0, -1}", {"kappa": kappa.tolist()})
    c0 = 0.5 / kappa
    c1 = 0.5 / (kappa + 1.0)
    return LiftingPair(left=np.stack([-c0, c1], axis=-1), right=np.stack([c0, c1], axis=-1))


# ─────────────────────────── operators ──────────────────────────────
@dataclass(frozen=True)
class BandedOperator:
    """S₁ (diagonal) and M₁ (offsets −2, 0, +2; symmetric) on the adapted basis."""
    stiffness: np.ndarray
    mass_main: np.ndarray
    mass_off: np.ndarray

    @property
    def size(self) -> int:
        return self.stiffness.shape[-1]

    def mode(self, index) -> "BandedOperator":
        return BandedOperator(self.stiffness[index], self.mass_main[index], self.mass_off[index])

    def matrix(self, alpha1: complex, D) -> np.ndarray:
        """Dense α₁⁻²S₁ + D·M₁ over any leading mode axes."""
        D = np.asarray(D, dtype=complex)[..., None]
        n = self.size
        out = np.zeros((*self.stiffness.shape[:-1], n, n), dtype=complex)
        idx = np.arange(n)
        out[..., idx, idx] = self.stiffness / alpha1 ** 2 + D * self.mass_main
        if n > 2:
            off = D * self.mass_off
            out[..., idx[:-2], idx[2:]] = off
            out[..., idx[2:], idx[:-2]] = off
        return out

    def banded(self, alpha1: complex, D: complex) -> np.ndarray:
        """Single-mode (2, 2) band storage for scipy.linalg.solve_banded."""
        if self.stiffness.ndim != 1:
            raise ContractViolation("banded() takes a single-mode operator")
        n = self.size
        ab = np.zeros((5, n), dtype=complex)
        ab[2] = self.stiffness / alpha1 ** 2 + D * self.mass_main
        if n > 2:
            ab[0, 2:] = D * self.mass_off
            ab[4, :-2] = D * self.mass_off
        return ab

    def apply(self, alpha1: complex, D, x: np.ndarray) -> np.ndarray:
        D = np.asarray(D, dtype=complex)[..., None]
        y = (self.stiffness / alpha1 ** 2 + D * self.mass_main) * x
        if self.size > 2:
            off = D * self.mass_off
            y[..., :-2] += off * x[..., 2:]
            y[..., 2:] += off * x[..., :-2]
        return y


def build_operator(basis: BoundaryBasis) -> BandedOperator:
    """
    s_kk = −2(2k+3)b_k,
    m_kk = 2/(2k+1) + 2b_k²/(2k+5),  m_{k,k+2} = m_{k+2,k} = 2b_k/(2k+5).
    """
    b = basis.b
    k = np.arange(basis.size)
    stiffness = -2.0 * (2 * k + 3) * b
    mass_main = 2.0 / (2 * k + 1) + 2.0 * b ** 2 / (2 * k + 5)
    n_off = max(basis.size - 2, 0)
    mass_off = 2.0 * b[..., :n_off] / (2 * k[:n_off] + 5)
    return BandedOperator(stiffness=stiffness, mass_main=mass_main, mass_off=mass_off)


# ─────────────────────────── per-mode algebra ───────────────────────
def assemble_rhs(u_coeffs: np.ndarray, history: np.ndarray, D, basis: BoundaryBasis,
                 alpha1: complex, lifting: LiftingPair) -> np.ndarray:
    """
    QΓF̃ with F̃ = Ũ^j − D·χ^{j+1}, i.e.
    F̃ = Ũ^j + (α₁D/2κ)(B̃_r+B̃_l)e₀ + (α₁D/(2(1+κ)))(B̃_r−B̃_l)e₁.
    """
    u_coeffs = np.asarray(u_coeffs, dtype=complex)
    history = np.asarray(history, dtype=complex)
    if history.shape[0] != 2 or history.shape[1:] != u_coeffs.shape[:-1]:
        raise ContractViolation(f"history {history.shape} does not match field {u_coeffs.shape}")
    f = u_coeffs.copy()
    f[..., :2] -= np.asarray(D)[..., None] * lifting.field(alpha1, history)
    return basis.project(f)


def solve_mode(ops: BandedOperator, alpha1: complex, D: complex, rhs: np.ndarray) -> np.ndarray:
    """Banded LU (partial pivoting) solve of (α₁⁻²S₁ + D·M₁)x = rhs for one mode."""
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape[-1] != ops.size:
        raise ContractViolation(f"rhs length {rhs.shape[-1]} != system size {ops.size}")
    try:
        return linalg.solve_banded((2, 2), ops.banded(alpha1, D), rhs)
    except linalg.LinAlgError as exc:
        raise SingularSystemError(f"banded solve failed: {exc}") from exc


def reconstruct_mode(w_hat: np.ndarray, history: np.ndarray, basis: BoundaryBasis,
                     alpha1: complex, lifting: LiftingPair) -> np.ndarray:
    """Ũ = Bŵ + χ, χ = α₁(χ_l B̃_l − χ_r B̃_r)."""
    u = basis.to_legendre(np.asarray(w_hat, dtype=complex))
    u[..., :2] += lifting.field(alpha1, np.asarray(history, dtype=complex))
    return u


class ModeSolver:
    """LU factors of α₁⁻²S₁ + D_m·M₁ for every mode, computed once per run."""

    def __init__(self, ops: BandedOperator, alpha1: complex, D: np.ndarray):
        self.log = logging.getLogger("ModeSolver")
        self.ops = ops
        self.alpha1 = alpha1
        self.D = np.asarray(D, dtype=complex)
        mats = ops.matrix(alpha1, self.D)
        self.factors = []
        for m, mat in enumerate(mats):
            lu, piv = linalg.lu_factor(mat, check_finite=False)
            if np.any(np.diag(lu) == 0):
                raise SingularSystemError(f"mode {m}: singular system matrix", {"mode": m})
            self.factors.append((lu, piv))
        self.log.debug("FACTORED modes=%d size=%d", len(self.factors), ops.size)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        out = np.empty_like(rhs)
        for m, factor in enumerate(self.factors):
            out[m] = linalg.lu_solve(factor, rhs[m], check_finite=False)
        return out


# ─────────────────────────── wall evaluation ────────────────────────
def wall_values(u_coeffs: np.ndarray) -> np.ndarray:
    """(u(−1), u(+1)) stacked on a new leading axis."""
    N = u_coeffs.shape[-1] - 1
    sign = np.where(np.arange(N + 1) % 2 == 0, 1.0, -1.0)
    return np.stack([u_coeffs @ sign, u_coeffs.sum(axis=-1)])


def wall_derivatives(u_coeffs: np.ndarray) -> np.ndarray:
    """(u'(−1), u'(+1)) from L_p'(±1) = (±1)^{p+1} p(p+1)/2."""
    N = u_coeffs.shape[-1] - 1
    p = np.arange(N + 1)
    slope = 0.5 * p * (p + 1)
    sign = np.where(p % 2 == 1, 1.0, -1.0)
    return np.stack([u_coeffs @ (sign * slope), u_coeffs @ slope])


def robin_residual(u_coeffs: np.ndarray, robin: RobinData, alpha1: complex) -> np.ndarray:
    """
    (u' − κu − α₁B̃_l at −1, u' + κu + α₁B̃_r at +1) per mode;
    u_coeffs is (nmodes, N+1).
    """
    val = wall_values(u_coeffs)
    der = wall_derivatives(u_coeffs)
    left = der[0] - robin.kappa * val[0] - alpha1 * robin.history[0]
    right = der[1] + robin.kappa * val[1] + alpha1 * robin.history[1]
    return np.stack([left, right])


def relative_robin_residual(u_coeffs: np.ndarray, robin: RobinData, alpha1: complex) -> float:
    res = np.max(np.abs(robin_residual(u_coeffs, robin, alpha1)), initial=0.0)
    scale = max(np.max(np.abs(u_coeffs), initial=0.0),
                np.max(np.abs(alpha1 * robin.history), initial=0.0))
    return 0.0 if scale == 0.0 else float(res / scale)
