"""
Grid-based checks that do not go through the coefficient formulas.

States are sampled on a uniform periodic phi-grid offset by half a step,
which keeps every sample off the quadrant boundaries and makes the grid
symmetric under both mirrors m_x (phi -> -phi) and m_y (phi -> pi - phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .core import ParitySector, coefficients, parity_basis
from .quadrature import CirclePoints, QuadratureConfig, circle_nodes

__all__ = [
    "CircleState",
    "GridSymmetryError",
    "angular_state",
    "apply_posmom",
    "apply_parity",
    "inner",
    "norm",
    "posmom_second_moment",
    "windowed_eigenstate",
    "eigenvalue_residual",
    "Reconstruction",
    "reconstruct",
    "gaussian_window",
    "sector_orthogonality",
]

TWO_PI = 2.0 * math.pi


class GridSymmetryError(ValueError):
    """The grid is not mapped onto itself by the requested reflection."""


@dataclass(frozen=True)
class CircleState:
    """Complex samples on phi_j = grid_offset + 2 pi j / n_points."""

    samples: np.ndarray
    n_points: int
    grid_offset: float
    margin: float = QuadratureConfig.singularity_margin

    def __post_init__(self):
        if self.n_points < 64 or self.n_points % 4:
            raise ValueError("n_points must be >= 64 and divisible by 4")
        if np.shape(self.samples) != (self.n_points,):
            raise ValueError("samples must have shape (n_points,)")
        if np.min(np.abs(np.sin(2.0 * self.phi))) <= self.margin:
            raise ValueError("grid point within the singularity margin of a quadrant boundary")
        self.samples.setflags(write=False)

    @property
    def step(self) -> float:
        return TWO_PI / self.n_points

    @property
    def phi(self) -> np.ndarray:
        return self.grid_offset + self.step * np.arange(self.n_points)

    def with_samples(self, samples) -> "CircleState":
        return CircleState(np.asarray(samples, dtype=complex), self.n_points, self.grid_offset, self.margin)

    @classmethod
    def from_function(cls, f: Callable, n_points: int, grid_offset: float | None = None) -> "CircleState":
        offset = math.pi / n_points if grid_offset is None else grid_offset
        phi = offset + TWO_PI / n_points * np.arange(n_points)
        return cls(np.asarray(f(phi), dtype=complex), n_points, offset)


def angular_state(m: int, n_points: int = 4096) -> CircleState:
    """exp(i m phi)/sqrt(2 pi) on the default grid."""
    return CircleState.from_function(lambda p: np.exp(1j * m * p) / math.sqrt(TWO_PI), n_points)


def _derivative(samples: np.ndarray, h: float) -> np.ndarray:
    # fourth-order periodic central difference
    return (
        -np.roll(samples, -2) + 8.0 * np.roll(samples, -1) - 8.0 * np.roll(samples, 1) + np.roll(samples, 2)
    ) / (12.0 * h)


def apply_posmom(state: CircleState) -> CircleState:
    """Q_x Phi = (i/2)(sin 2phi Phi' + cos 2phi Phi) on the grid."""
    phi = state.phi
    d = _derivative(state.samples, state.step)
    return state.with_samples(0.5j * (np.sin(2.0 * phi) * d + np.cos(2.0 * phi) * state.samples))


def _reflection_index(state: CircleState, image: np.ndarray) -> np.ndarray:
    pos = (np.mod(image, TWO_PI) - state.grid_offset) / state.step
    idx = np.rint(pos)
    if np.max(np.abs(pos - idx)) > 1e-8:
        raise GridSymmetryError("grid offset does not respect the reflection")
    return idx.astype(int) % state.n_points


def apply_parity(which: str, state: CircleState) -> CircleState:
    """(m_x Phi)(phi) = Phi(-phi); (m_y Phi)(phi) = Phi(pi - phi)."""
    if which == "m_x":
        image = -state.phi
    elif which == "m_y":
        image = math.pi - state.phi
    else:
        raise ValueError("which must be 'm_x' or 'm_y'")
    return state.with_samples(state.samples[_reflection_index(state, image)])


def inner(a: CircleState, b: CircleState) -> complex:
    """<a|b> by the periodic trapezoid rule."""
    return complex(np.sum(np.conj(a.samples) * b.samples) * a.step)


def norm(state: CircleState) -> float:
    return math.sqrt(inner(state, state).real)


def posmom_second_moment(state: CircleState) -> float:
    """<Phi|Q_x^2|Phi> = ||Q_x Phi||^2, using the grid operator."""
    return norm(apply_posmom(state)) ** 2


def _smooth_step(x: np.ndarray) -> np.ndarray:
    # C-infinity transition from 0 (x <= 0) to 1 (x >= 1)
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


def windowed_eigenstate(lam: float, n_points: int, edge: float = 0.15):
    """
    xi_lambda multiplied by a smooth window that vanishes within ``edge`` of
    each quadrant boundary and equals one beyond 2 * edge.

    Returns the state and a mask of grid points whose whole difference
    stencil lies where the window is one.
    """
    def f(phi):
        pts = CirclePoints.from_phi(phi)
        dist = np.minimum(pts.theta, pts.co)
        window = _smooth_step((dist - edge) / edge)
        out = np.zeros(phi.shape, dtype=complex)
        inside = window > 0
        out[inside] = window[inside] * np.exp(-1j * lam * pts.log_abs_tan[inside]) / np.sqrt(
            math.pi * pts.abs_sin2phi[inside]
        )
        return out

    state = CircleState.from_function(f, n_points)
    pts = CirclePoints.from_phi(state.phi)
    interior = np.minimum(pts.theta, pts.co) > 2.0 * edge + 3.0 * state.step
    return state, interior


def eigenvalue_residual(lam: float, n_points: int, edge: float = 0.15) -> float:
    """Relative L2 norm of (Q_x - lam) xi_lambda on the window's flat interior."""
    state, interior = windowed_eigenstate(lam, n_points, edge)
    q = apply_posmom(state).samples[interior]
    target = lam * state.samples[interior]
    return float(np.linalg.norm(q - target) / np.linalg.norm(target))


class Reconstruction(NamedTuple):
    state: CircleState
    l2_residual: float
    sector_parts: dict


def _trapezoid_weights(grid: np.ndarray) -> np.ndarray:
    if grid.size < 2:
        return np.zeros(grid.size)
    w = np.empty(grid.size)
    dx = np.diff(grid)
    w[0] = 0.5 * dx[0]
    w[-1] = 0.5 * dx[-1]
    w[1:-1] = 0.5 * (dx[:-1] + dx[1:])
    return w


def reconstruct(m: int, lambda_grid, cfg: QuadratureConfig = QuadratureConfig(),
                n_points: int = 2048) -> Reconstruction:
    """
    Rebuild exp(i m phi)/sqrt(2 pi) from its four sector expansions.

    Each sector term int c_s(lambda) psi_lambda^s(phi) dlambda is a
    trapezoid sum over ``lambda_grid``; the terms are formed separately and
    then added. For a faithful result the grid should cover at least
    |lambda| <= 8 + |m|/2. The residual is the discrete L2 distance to the
    exact state on the phi-grid.
    """
    grid = np.asarray(lambda_grid, dtype=float)
    target = angular_state(m, n_points)
    pts = CirclePoints.from_phi(target.phi)
    total = np.zeros(n_points, dtype=complex)
    parts = {}
    if grid.size:
        coeffs = coefficients(m, grid, cfg)
        weights = _trapezoid_weights(grid)
        kernel = np.exp(-1j * np.outer(pts.log_abs_tan, grid)) / np.sqrt(math.pi * pts.abs_sin2phi)[:, None]
        for sector in ParitySector:
            c = np.asarray(coeffs[sector]) * weights
            part = 0.5 * sector.signs[pts.quadrant] * (kernel @ c)
            parts[sector] = part
            total += part
    state = target.with_samples(total)
    residual = math.sqrt(np.sum(np.abs(total - target.samples) ** 2) * target.step)
    return Reconstruction(state, residual, parts)


def gaussian_window(width: float = 1.0, center: float = 0.0) -> Callable:
    """Real Gaussian g(lambda) with int g^2 = 1; width is the std-dev of g^2."""
    norm_c = (2.0 * math.pi * width**2) ** -0.25

    def g(lam):
        lam = np.asarray(lam, dtype=float)
        return norm_c * np.exp(-((lam - center) ** 2) / (4.0 * width**2))

    return g


def sector_orthogonality(window: Callable, sectors: tuple, cfg: QuadratureConfig = QuadratureConfig(),
                         n_points: int = 8192, lambda_max: float = 10.0, lambda_step: float = 0.01) -> complex:
    """
    Overlap of the wave packets int g(lambda) psi_lambda^{s1} dlambda and
    int g(lambda) psi_lambda^{s2} dlambda over the whole circle.

    ``window`` must be negligible beyond |lambda| = lambda_max; the packets
    are built by the trapezoid rule in lambda at the tanh-sinh circle nodes.
    Delta normalisation of the sector bases makes the result delta_{s1 s2}.
    """
    s1, s2 = (ParitySector(s) if not isinstance(s, ParitySector) else s for s in sectors)
    grid = np.arange(-lambda_max, lambda_max + 0.5 * lambda_step, lambda_step)
    weights = _trapezoid_weights(grid) * window(grid)
    pts, w = circle_nodes(n_points)

    overlap = 0.0j
    for start in range(0, w.size, 512):
        rows = slice(start, start + 512)
        block = CirclePoints(pts.quadrant[rows, None], pts.theta[rows, None], pts.co[rows, None])
        p1 = parity_basis(s1, grid[None, :], block) @ weights
        p2 = p1 if s2 is s1 else parity_basis(s2, grid[None, :], block) @ weights
        overlap += np.sum(w[rows] * np.conj(p1) * p2)
    return complex(overlap)
