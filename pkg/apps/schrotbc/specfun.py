# apps/schrotbc/specfun.py
"""
Legendre / Lobatto / Fourier / Hermite kernels.

Everything here is pure: grids are built once and shared read-only by the
solver, the exact-solution quadrature and the error metrics.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np
from scipy import special

from apps.schrotbc.errors import ContractViolation, LglConvergenceError
from apps.schrotbc.models import Direction

log = logging.getLogger(__name__)

LGL_TOL = 1e-14
LGL_RESIDUAL_TOL = 1e-12          # on (1−y²)L_N'/N, which is O(1)
LGL_MAX_ITER = 100


# ─────────────────────────── polynomials ────────────────────────────
def legendre_eval(n: int, y):
    """L_n(y) and L_n'(y) by the Bonnet recurrence (vectorised over y)."""
    if n < 0:
        raise ContractViolation(f"degree must be >= 0, got {n}")
    y = np.asarray(y, dtype=float)
    p_prev, p = np.ones_like(y), y.copy()
    d_prev, d = np.zeros_like(y), np.ones_like(y)
    if n == 0:
        p, d = p_prev, d_prev
    for k in range(1, n):
        p_prev, p = p, ((2 * k + 1) * y * p - k * p_prev) / (k + 1)
        d_prev, d = d, d_prev + (2 * k + 1) * p_prev
    if y.ndim == 0:
        return float(p), float(d)
    return p, d


def legendre_table(n: int, y) -> tuple[np.ndarray, np.ndarray]:
    """Columns L_0..L_n and their derivatives at the points y, shape (len(y), n+1)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    val = np.empty((y.size, n + 1))
    der = np.empty((y.size, n + 1))
    val[:, 0], der[:, 0] = 1.0, 0.0
    if n >= 1:
        val[:, 1], der[:, 1] = y, 1.0
    for k in range(1, n):
        val[:, k + 1] = ((2 * k + 1) * y * val[:, k] - k * val[:, k - 1]) / (k + 1)
        der[:, k + 1] = der[:, k - 1] + (2 * k + 1) * val[:, k]
    return val, der


def hermite_eval(n: int, x):
    """Physicists' Hermite polynomial H_n(x)."""
    if n < 0:
        raise ContractViolation(f"degree must be >= 0, got {n}")
    out = special.eval_hermite(n, np.asarray(x, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


# ─────────────────────────── LGL grid ───────────────────────────────
@dataclass(frozen=True)
class LglGrid:
    order: int
    nodes: np.ndarray
    weights: np.ndarray
    vandermonde: np.ndarray        # V[j, p] = L_p(x_j)

    @property
    def size(self) -> int:
        return self.order + 1

    @property
    def discrete_norms(self) -> np.ndarray:
        """γ̂_p = 2/(2p+1), except γ̂_N = 2/N on the Lobatto nodes."""
        gam = 2.0 / (2.0 * np.arange(self.order + 1) + 1.0)
        gam[-1] = 2.0 / self.order
        return gam


def lgl_grid(N: int) -> LglGrid:
    """
    Lobatto nodes (roots of (1−y²)L_N') and weights 2/(N(N+1)L_N²).

    Newton on (1−y²)L_N' from the Chebyshev-Lobatto points; the endpoints are
    fixed points of the iteration. A node is accepted once its step is below
    LGL_TOL and the scaled residual y·L_N − L_{N−1} = (1−y²)L_N'/N is below
    LGL_RESIDUAL_TOL.
    """
    if N < 1:
        raise ContractViolation(f"LGL order must be >= 1, got {N}")

    x = -np.cos(np.pi * np.arange(N + 1) / N)
    for it in range(LGL_MAX_ITER):
        p, _ = legendre_eval(N, x)
        p_low, _ = legendre_eval(N - 1, x)
        residual = x * p - p_low
        dx = residual / ((N + 1) * p)
        x = x - dx
        if np.max(np.abs(dx)) <= LGL_TOL and np.max(np.abs(residual)) <= LGL_RESIDUAL_TOL:
            break
    else:
        raise LglConvergenceError(f"LGL iteration for N={N} did not converge",
                                  {"order": N, "last_step": float(np.max(np.abs(dx))),
                                   "residual": float(np.max(np.abs(residual)))})

    x = 0.5 * (x - x[::-1])        # exact symmetry about 0
    x[0], x[-1] = -1.0, 1.0
    if np.any(np.diff(x) <= 0):
        raise LglConvergenceError(f"LGL nodes for N={N} not strictly increasing", {"order": N})

    vand, _ = legendre_table(N, x)
    weights = 2.0 / (N * (N + 1) * vand[:, N] ** 2)
    log.debug("LGL-GRID N=%d iterations=%d", N, it + 1)
    return LglGrid(order=N, nodes=x, weights=weights, vandermonde=vand)


# ─────────────────────────── transforms ─────────────────────────────
def legendre_transform(direction: Direction, data, grid: LglGrid, axis: int = 0) -> np.ndarray:
    """
    analysis:  f̃_p = Σ_j w_j f(x_j) L_p(x_j) / γ̂_p
    synthesis: f(x_j) = Σ_p f̃_p L_p(x_j)
    """
    data = np.asarray(data, dtype=complex)
    if data.shape[axis] != grid.size:
        raise ContractViolation(f"expected {grid.size} entries along axis {axis}, got {data.shape[axis]}")
    work = np.moveaxis(data, axis, 0)
    flat = work.reshape(grid.size, -1)
    if direction is Direction.ANALYSIS:
        out = (grid.vandermonde * grid.weights[:, None]).T @ flat
        out /= grid.discrete_norms[:, None]
    else:
        out = grid.vandermonde @ flat
    return np.moveaxis(out.reshape(work.shape), 0, axis)


@dataclass(frozen=True)
class ModeIndexSet:
    size: int

    def __post_init__(self):
        if self.size < 2 or self.size % 2:
            raise ContractViolation(f"Fourier size must be even and >= 2, got {self.size}")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.size // 2, self.size // 2)

    def nodes(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.size) / self.size


def _alternating(n: int) -> np.ndarray:
    q = ModeIndexSet(n).indices
    return np.where(q % 2 == 0, 1.0, -1.0)


def fourier_transform(direction: Direction, data, axes: Sequence[int] = (-1,)) -> np.ndarray:
    """
    analysis:  f̃_q = (1/N) Σ_j f(y_j) e^{−i q y_j},  y_j = −π + 2πj/N
    synthesis: f(y_j) = Σ_q f̃_q e^{i q y_j}

    Coefficients are stored in ascending q order (−N/2 … N/2−1).
    """
    data = np.asarray(data, dtype=complex)
    axes = tuple(ax % data.ndim for ax in axes)
    sizes = [data.shape[ax] for ax in axes]
    for n in sizes:
        if n % 2:
            raise ContractViolation(f"Fourier size must be even, got {n}")

    # e^{−iqy_j} = (−1)^q e^{−2πi qj/N}
    sign = np.ones([1] * data.ndim)
    for ax, n in zip(axes, sizes):
        shape = [1] * data.ndim
        shape[ax] = n
        sign = sign * _alternating(n).reshape(shape)

    if direction is Direction.ANALYSIS:
        out = np.fft.fftshift(np.fft.fftn(data, axes=axes), axes=axes)
        return out * sign / prod(sizes)
    out = np.fft.ifftn(np.fft.ifftshift(data * sign, axes=axes), axes=axes)
    return out * prod(sizes)


# ─────────────────────────── tensor grid ────────────────────────────
@dataclass(frozen=True)
class TensorGrid:
    """Lobatto direction (axis 0) times one or two periodic directions."""
    lgl: LglGrid
    n_perp: tuple[int, ...]

    def __post_init__(self):
        for n in self.n_perp:
            ModeIndexSet(n)

    @property
    def dim(self) -> int:
        return 1 + len(self.n_perp)

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.lgl.size, *self.n_perp)

    @property
    def nmodes(self) -> int:
        return prod(self.n_perp)

    def perp_nodes(self) -> list[np.ndarray]:
        return [ModeIndexSet(n).nodes() for n in self.n_perp]

    def mode_numbers(self) -> list[np.ndarray]:
        """Per transverse direction, the mode index of every flattened mode."""
        grids = np.meshgrid(*[ModeIndexSet(n).indices for n in self.n_perp], indexing="ij")
        return [g.ravel() for g in grids]

    def reference_points(self) -> list[np.ndarray]:
        return list(np.meshgrid(self.lgl.nodes, *self.perp_nodes(), indexing="ij"))

    def quadrature_weights(self) -> np.ndarray:
        """LGL weights times periodic trapezoid weights 2π/N on the reference cell."""
        w = self.lgl.weights
        for n in self.n_perp:
            w = np.multiply.outer(w, np.full(n, 2.0 * np.pi / n))
        return w

    def analysis(self, samples) -> np.ndarray:
        samples = np.asarray(samples, dtype=complex)
        if samples.shape != self.shape:
            raise ContractViolation(f"samples shape {samples.shape} != grid {self.shape}")
        axes = tuple(range(1, self.dim))
        coeffs = fourier_transform(Direction.ANALYSIS, samples, axes=axes)
        coeffs = legendre_transform(Direction.ANALYSIS, coeffs, self.lgl, axis=0)
        return coeffs.reshape(self.lgl.size, self.nmodes)

    def synthesis(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.lgl.size, self.nmodes):
            raise ContractViolation(f"coefficient shape {coeffs.shape} != {(self.lgl.size, self.nmodes)}")
        field = legendre_transform(Direction.SYNTHESIS, coeffs, self.lgl, axis=0)
        field = field.reshape(self.shape)
        return fourier_transform(Direction.SYNTHESIS, field, axes=tuple(range(1, self.dim)))


@dataclass(frozen=True)
class CoeffField:
    """Legendre × Fourier coefficients, shape (N+1, nmodes), on a tensor grid."""
    coeffs: np.ndarray
    grid: TensorGrid

    def __post_init__(self):
        if self.coeffs.shape != (self.grid.lgl.size, self.grid.nmodes):
            raise ContractViolation(f"coefficient shape {self.coeffs.shape} does not fit the grid")

    def samples(self) -> np.ndarray:
        return self.grid.synthesis(self.coeffs)

    def norm(self) -> float:
        """Reference-cell L² norm from Parseval (Fourier) and γ_p (Legendre)."""
        gam = 2.0 / (2.0 * np.arange(self.grid.lgl.size) + 1.0)
        weight = (2.0 * np.pi) ** len(self.grid.n_perp)
        return float(np.sqrt(weight * np.sum(gam[:, None] * np.abs(self.coeffs) ** 2)))
