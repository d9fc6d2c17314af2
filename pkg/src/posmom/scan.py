"""
Density sweeps over lambda-grids and the figure-level analyses built on them.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Backend, classical_cdf, coefficients, density
from .quadrature import QuadratureConfig, QuadratureError
from .specfun import ConvergenceError, hermite_momentum_density

__all__ = [
    "DensityTable",
    "ExtremaReport",
    "OscillatorComparison",
    "ScanError",
    "lambda_grid",
    "default_range",
    "scan_density",
    "count_extrema",
    "refine_minimum",
    "oscillator_level",
    "oscillator_scale",
    "oscillator_comparison",
    "kolmogorov_distance",
    "classical_comparison",
]

# points per work item; fixed so output never depends on the worker count
_BLOCK = 256


class ScanError(ArithmeticError):
    """A grid point failed; ``lam`` identifies it."""

    def __init__(self, lam: float, cause: Exception):
        super().__init__(f"density evaluation failed at lambda = {lam:.12g}: {cause}")
        self.lam = lam
        self.cause = cause


@dataclass(frozen=True)
class DensityTable:
    m: int
    lambdas: np.ndarray
    alpha2: np.ndarray
    beta2: np.ndarray
    mu2: np.ndarray
    nu2: np.ndarray
    p: np.ndarray
    cfg_fingerprint: str
    backend: str

    def __post_init__(self):
        if self.lambdas.size > 1 and np.any(np.diff(self.lambdas) <= 0):
            raise ValueError("lambdas must be strictly increasing")

    COLUMNS = ("lambda", "p", "alpha2", "beta2", "mu2", "nu2")

    def columns(self) -> dict:
        return {
            "lambda": self.lambdas,
            "p": self.p,
            "alpha2": self.alpha2,
            "beta2": self.beta2,
            "mu2": self.mu2,
            "nu2": self.nu2,
        }

    def restrict(self, lo: float = -np.inf, hi: float = np.inf) -> "DensityTable":
        keep = (self.lambdas >= lo) & (self.lambdas <= hi)
        return DensityTable(self.m, self.lambdas[keep], self.alpha2[keep], self.beta2[keep],
                            self.mu2[keep], self.nu2[keep], self.p[keep], self.cfg_fingerprint,
                            self.backend)

    def trapezoid(self, weight=None) -> float:
        y = self.p if weight is None else self.p * weight
        return float(np.trapezoid(y, self.lambdas))


def lambda_grid(lambda_min: float, lambda_max: float, step: float) -> np.ndarray:
    """Uniform grid from lambda_min in steps of ``step``, not passing lambda_max.

    Points are rounded to 12 decimals so that grids symmetric about zero are
    exactly symmetric and contain an exact 0.0.
    """
    if not step > 0:
        raise ValueError("step must be positive")
    if lambda_max < lambda_min:
        raise ValueError("empty lambda range")
    n = int(math.floor((lambda_max - lambda_min) / step + 1e-9)) + 1
    grid = np.round(lambda_min + step * np.arange(n), 12)
    return grid + 0.0  # no negative zeros


def default_range(m: int) -> tuple[float, float]:
    half = 0.5 * abs(m) + 6.0
    return -half, half


def _workers() -> int:
    env = os.environ.get("POSMOM_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def _sector_block(m: int, lams: np.ndarray, cfg: QuadratureConfig, backend: Backend):
    try:
        coeffs = coefficients(m, lams, cfg, backend)
    except (QuadratureError, ConvergenceError) as exc:
        # block failed as a whole; redo it point by point to name the culprit
        for lam in lams:
            try:
                coefficients(m, float(lam), cfg, backend)
            except (QuadratureError, ConvergenceError) as point_exc:
                raise ScanError(float(lam), point_exc) from point_exc
        raise ScanError(float(lams[0]), exc) from exc
    return np.stack([np.abs(np.broadcast_to(c, lams.shape)) ** 2
                     for c in (coeffs.alpha, coeffs.beta, coeffs.mu, coeffs.nu)])


def scan_density(m: int, lambda_min: float | None = None, lambda_max: float | None = None,
                 step: float = 0.01, cfg: QuadratureConfig = QuadratureConfig(),
                 backend: Backend | str = Backend.QUADRATURE) -> DensityTable:
    """
    Tabulate the four sector densities and their sum on a uniform grid.

    The grid is cut into fixed blocks evaluated on a thread pool (size from
    POSMOM_THREADS, else the CPU count); blocks are assembled in grid order,
    so the table is identical for any worker count.
    """
    backend = Backend(backend)
    lo_default, hi_default = default_range(m)
    lo = lo_default if lambda_min is None else lambda_min
    hi = hi_default if lambda_max is None else lambda_max
    grid = lambda_grid(lo, hi, step)
    blocks = [grid[i:i + _BLOCK] for i in range(0, grid.size, _BLOCK)]
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        parts = list(pool.map(lambda b: _sector_block(m, b, cfg, backend), blocks))
    sectors = np.concatenate(parts, axis=1)
    a2, b2, m2, n2 = sectors
    p = a2 + b2 + m2 + n2
    return DensityTable(m, grid, a2, b2, m2, n2, p, cfg.fingerprint(), backend.value)


class ExtremaReport(NamedTuple):
    n_maxima: int
    n_minima: int
    n_near_zero_minima: int
    maxima: list
    minima: list
    threshold: float


def count_extrema(table: DensityTable, node_threshold: float | None = None) -> ExtremaReport:
    """
    Strict interior local extrema of p after merging runs of equal values.

    A minimum is counted as near zero if p < node_threshold (default
    1e-3 max p). Locations are the midpoints of the merged runs. Whether a
    minimum is a true node cannot be decided from the table; see
    :func:`refine_minimum`.
    """
    p = table.p
    lam = table.lambdas
    peak = float(np.max(p)) if p.size else 0.0
    threshold = 1e-3 * peak if node_threshold is None else node_threshold

    # collapse plateaus
    change = np.concatenate([[True], p[1:] != p[:-1]])
    starts = np.nonzero(change)[0]
    ends = np.concatenate([starts[1:], [p.size]]) - 1
    vals = p[starts]
    where = 0.5 * (lam[starts] + lam[ends])

    maxima, minima, near = [], [], 0
    for i in range(1, vals.size - 1):
        if vals[i] > vals[i - 1] and vals[i] > vals[i + 1]:
            maxima.append(float(where[i]))
        elif vals[i] < vals[i - 1] and vals[i] < vals[i + 1]:
            minima.append(float(where[i]))
            near += vals[i] < threshold
    return ExtremaReport(len(maxima), len(minima), int(near), maxima, minima, threshold)


def refine_minimum(m: int, lam: float, half_width: float,
                   cfg: QuadratureConfig = QuadratureConfig(),
                   backend: Backend | str = Backend.QUADRATURE, tol: float = 1e-9) -> tuple[float, float]:
    """
    Golden-section search for the minimum of p_m on [lam - half_width, lam + half_width].

    Returns (lambda, p) at the located minimum. Used to tell a true node
    (p reaching zero) from a shallow positive minimum.
    """
    backend = Backend(backend)
    f = lambda x: float(density(m, x, cfg, backend))  # noqa: E731
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lam - half_width, lam + half_width
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def oscillator_level(m: int) -> int:
    """Oscillator level paired with m: m/2 - 1 for even m, (m-1)/2 for odd m."""
    m = abs(m)
    return m // 2 - 1 if m % 2 == 0 else (m - 1) // 2


def oscillator_scale(m: int, n: int) -> float:
    """Momentum unit s with (n + 1/2) s^2 = (m^2 + 1)/8, the posmom variance."""
    return math.sqrt((m * m + 1) / 8.0 / (n + 0.5))


class OscillatorComparison(NamedTuple):
    n_oscillator: int
    scale: float
    l1_distance: float


def oscillator_comparison(m: int, table: DensityTable, cfg: QuadratureConfig | None = None) -> OscillatorComparison:
    """L1 distance between p_m and the variance-matched oscillator momentum density."""
    if abs(m) < 4:
        raise ValueError("oscillator comparison needs |m| >= 4")
    n = oscillator_level(m)
    s = oscillator_scale(m, n)
    h = hermite_momentum_density(n, table.lambdas, s)
    return OscillatorComparison(n, s, float(np.trapezoid(np.abs(table.p - h), table.lambdas)))


def kolmogorov_distance(m: int, lambdas, cdf_values) -> float:
    """sup |F - F_arcsine| over the given points."""
    return float(np.max(np.abs(np.asarray(cdf_values) - classical_cdf(m, lambdas))))


def classical_comparison(m: int, table: DensityTable) -> float:
    """Kolmogorov distance between the tabulated p_m (as a normalised CDF) and the arcsine law."""
    if abs(m) < 10:
        raise ValueError("classical comparison needs |m| >= 10")
    lam, p = table.lambdas, table.p
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(lam))])
    cdf /= cdf[-1]
    return kolmogorov_distance(m, lam, cdf)
