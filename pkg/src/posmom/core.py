"""
Posmom eigenfunctions, the four parity sectors, and spectral densities of
the angular-momentum eigenstates exp(i m phi)/sqrt(2 pi).

Units: hbar = 1, circle radius 1. The posmom operator is

    Q_x = (i/2) (sin 2phi d/dphi + cos 2phi),

with eigenfunctions xi_lambda(phi) = |sin 2phi|^{-1/2} exp(-i lambda ln|tan phi|) / sqrt(pi),
delta-normalised on each quadrant.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .quadrature import (
    HALF_PI,
    CirclePoints,
    QuadratureConfig,
    integrate_line,
    sqrt_sech_tail_bound,
)
from .specfun import hyp2f1_at_minus_one, log_gamma

__all__ = [
    "ParitySector",
    "CoefficientSet",
    "Backend",
    "DomainError",
    "xi",
    "parity_basis",
    "coefficient_integral_I",
    "coefficients",
    "coefficients_closed_form",
    "density",
    "density_closed_form",
    "density_integral",
    "moments",
    "classical_density",
    "classical_cdf",
    "CLOSED_FORM_M",
    "MAX_LAMBDA",
]

MAX_ABS_M = 10_000
# the quadrature path subdivides in proportion to |lambda|; beyond this it is refused
MAX_LAMBDA = 200.0
CLOSED_FORM_M = (0, 1, 3, 5)

# lambda values integrated together; fixed so results never depend on how a grid is split
_CHUNK = 64
_INV_SQRT2_PI = 1.0 / (math.sqrt(2.0) * math.pi)


class DomainError(ValueError):
    """Evaluation point on (or within the margin of) a quadrant boundary."""


class Backend(str, enum.Enum):
    QUADRATURE = "quadrature"
    HYPERGEOMETRIC = "hypergeometric"
    CLOSED_FORM = "closed-form"


class ParitySector(enum.Enum):
    """
    Simultaneous eigenspaces of Q_x, m_x (phi -> -phi) and m_y (phi -> pi - phi).

    The value is the sign pattern over quadrants I..IV. The four patterns are
    the characters of the Klein group generated by the two mirrors.
    """

    XY = (1, 1, 1, 1)
    XBAR_YBAR = (1, -1, 1, -1)
    XBAR_Y = (1, 1, -1, -1)
    X_YBAR = (1, -1, -1, 1)

    @property
    def signs(self) -> np.ndarray:
        return np.array(self.value, dtype=float)

    @property
    def coefficient_name(self) -> str:
        return _SECTOR_FIELD[self]


_SECTOR_FIELD = {
    ParitySector.XY: "alpha",
    ParitySector.XBAR_YBAR: "beta",
    ParitySector.XBAR_Y: "mu",
    ParitySector.X_YBAR: "nu",
}


@dataclass(frozen=True)
class CoefficientSet:
    """Sector amplitudes (alpha, beta, mu, nu) of one state; scalars or arrays over lambda."""

    alpha: complex | np.ndarray
    beta: complex | np.ndarray
    mu: complex | np.ndarray
    nu: complex | np.ndarray

    def squared(self):
        return tuple(np.abs(c) ** 2 for c in (self.alpha, self.beta, self.mu, self.nu))

    def total(self):
        a2, b2, m2, n2 = self.squared()
        return a2 + b2 + m2 + n2

    def conj(self) -> "CoefficientSet":
        return CoefficientSet(*(np.conj(c) for c in (self.alpha, self.beta, self.mu, self.nu)))

    def __getitem__(self, sector: ParitySector):
        return getattr(self, sector.coefficient_name)


def _as_points(phi, margin: float) -> CirclePoints:
    if isinstance(phi, CirclePoints):
        if np.any(phi.theta <= 0) or np.any(phi.co <= 0):
            raise DomainError("point on a quadrant boundary")
        return phi
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(np.sin(2.0 * phi)) <= margin):
        raise DomainError("phi within the singularity margin of a multiple of pi/2")
    return CirclePoints.from_phi(phi)


def xi(lam, phi, margin: float = QuadratureConfig.singularity_margin):
    """
    Posmom eigenfunction xi_lambda(phi) on the whole circle.

    ``phi`` may be raw angles or a :class:`CirclePoints`; lam and phi
    broadcast. Raises DomainError within ``margin`` of a quadrant boundary.
    """
    pts = _as_points(phi, margin)
    lam = np.asarray(lam, dtype=float)
    out = np.exp(-1j * lam * pts.log_abs_tan) / np.sqrt(math.pi * pts.abs_sin2phi)
    return out[()] if out.ndim == 0 else out


def parity_basis(sector: ParitySector, lam, phi, margin: float = QuadratureConfig.singularity_margin):
    """Sector eigenfunction psi_lambda^sector(phi) = (quadrant sign) xi_lambda(phi) / 2."""
    pts = _as_points(phi, margin)
    sign = sector.signs[pts.quadrant]
    out = 0.5 * sign * xi(lam, pts)
    return out[()] if np.ndim(out) == 0 else out


def _check_m(m: int) -> int:
    m = int(m)
    if abs(m) > MAX_ABS_M:
        raise ValueError(f"|m| must not exceed {MAX_ABS_M}")
    return m


def _I_quadrature(m: int, lam: np.ndarray, cfg: QuadratureConfig) -> np.ndarray:
    # u = ln tan phi:  I_m = (1/2) int sqrt(sech u) e^{i m arctan(e^u)} e^{i lam u} du
    if np.any(np.abs(lam) > MAX_LAMBDA):
        raise ValueError(f"quadrature backend supports |lambda| <= {MAX_LAMBDA:g}")
    tail = 0.5 * sqrt_sech_tail_bound(cfg.line_truncation)
    out = np.empty(lam.shape, dtype=complex)
    for start in range(0, lam.size, _CHUNK):
        block = lam[start:start + _CHUNK]

        def integrand(u, block=block):
            envelope = 0.5 * np.sqrt(1.0 / np.cosh(u)) * np.exp(1j * m * np.arctan(np.exp(u)))
            return envelope[:, None] * np.exp(1j * np.outer(u, block))

        out[start:start + _CHUNK] = integrate_line(integrand, cfg, tail_bound=tail).value
    return out


def _I_hypergeometric(m: int, lam: np.ndarray) -> np.ndarray:
    a = 0.5 + 1j * lam
    c = 0.5 * m + 1.0 + 1j * lam
    # real prefactor exp(-pi lam/2) Gamma((m+1)/2) folded into the log-Gamma ratio
    log_r = -0.5 * math.pi * lam + log_gamma(0.5 * (m + 1)).real
    h = np.exp(log_r + log_gamma(a) - log_gamma(c)) * hyp2f1_at_minus_one(a, 0.5 * (m + 1), c)
    return (0.5 + 0.5j) * (h - 1j ** ((m + 1) % 4) * np.conj(h))


def coefficient_integral_I(m: int, lam, backend: Backend | str = Backend.QUADRATURE,
                           cfg: QuadratureConfig = QuadratureConfig()):
    """
    I_m(lambda) = int_0^{pi/2} e^{i m phi} (sin 2phi)^{-1/2} e^{i lambda ln tan phi} dphi.

    ``quadrature`` integrates the smooth u = ln tan phi form on the real
    line. ``hypergeometric`` evaluates

        (1+i)/2 e^{-pi lambda/2} Gamma((m+1)/2) [f - i^{m+1} conj(f)],
        f = Gamma(1/2 + i lambda)/Gamma(m/2 + 1 + i lambda)
            2F1(1/2 + i lambda, (m+1)/2; m/2 + 1 + i lambda; -1),

    which loses roughly exp(pi |lambda| / 2) in relative accuracy to
    cancellation and is meant as a cross-check at moderate |lambda|.
    """
    m = _check_m(m)
    if m < 0:
        raise ValueError("I_m is defined here for m >= 0")
    backend = Backend(backend)
    lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
    if backend is Backend.QUADRATURE:
        out = _I_quadrature(m, lam_arr.ravel(), cfg).reshape(lam_arr.shape)
    elif backend is Backend.HYPERGEOMETRIC:
        out = _I_hypergeometric(m, lam_arr)
    else:
        raise ValueError("I_m has no closed-form backend; use density_closed_form")
    return complex(out[0]) if np.ndim(lam) == 0 else out


def coefficients(m: int, lam, cfg: QuadratureConfig = QuadratureConfig(),
                 backend: Backend | str = Backend.QUADRATURE) -> CoefficientSet:
    """
    Sector amplitudes of exp(i m phi)/sqrt(2 pi) at eigenvalue(s) lam.

    With s_J the quadrant signs of a sector, the four quadrant integrals are
    I(lam), i^m I(-lam), (-1)^m I(lam), (-i)^m I(-lam), so

        alpha, beta = [1 + (-1)^m] / (2 pi sqrt 2) (I(lam) +/- i^m I(-lam))
        mu, nu      = [1 - (-1)^m] / (2 pi sqrt 2) (I(lam) +/- i^m I(-lam)).

    Negative m uses coefficients(-m, lam) = conj(coefficients(m, -lam)).
    For m = 0, beta is set to exactly zero.
    """
    m = _check_m(m)
    backend = Backend(backend)
    if backend is Backend.CLOSED_FORM:
        return coefficients_closed_form(m, lam)
    if m < 0:
        return coefficients(-m, -np.asarray(lam, dtype=float), cfg, backend).conj()

    lam_arr = np.asarray(lam, dtype=float)
    flat = lam_arr.ravel()
    both = coefficient_integral_I(m, np.concatenate([flat, -flat]), backend, cfg)
    i_plus = both[:flat.size].reshape(lam_arr.shape)
    i_minus = both[flat.size:].reshape(lam_arr.shape)
    phase = 1j ** (m % 4)
    plus = _INV_SQRT2_PI * (i_plus + phase * i_minus)
    minus = _INV_SQRT2_PI * (i_plus - phase * i_minus)
    zero = np.zeros_like(plus)
    if m == 0:
        coeffs = CoefficientSet(plus, zero, zero, zero)
    elif m % 2 == 0:
        coeffs = CoefficientSet(plus, minus, zero, zero)
    else:
        coeffs = CoefficientSet(zero, zero, plus, minus)
    if lam_arr.ndim == 0:
        coeffs = CoefficientSet(*(complex(np.ravel(c)[0]) for c in
                                  (coeffs.alpha, coeffs.beta, coeffs.mu, coeffs.nu)))
    return coeffs


def _closed_mu(m: int, lam: np.ndarray) -> np.ndarray:
    denom = np.cosh(0.5 * math.pi * lam) - 1j * np.sinh(0.5 * math.pi * lam)
    if m == 1:
        return 1j / (math.sqrt(2.0) * denom)
    if m == 3:
        return math.sqrt(2.0) * lam / denom
    return -(1.0 - 4.0 * lam**2) * 1j / (2.0 * math.sqrt(2.0) * denom)


def coefficients_closed_form(m: int, lam) -> CoefficientSet:
    """Analytic amplitudes for m in {0, 1, 3, 5} (and their negatives)."""
    m = _check_m(m)
    if abs(m) not in CLOSED_FORM_M:
        raise ValueError(f"no closed form for m = {m}; available for |m| in {CLOSED_FORM_M}")
    if m < 0:
        return coefficients_closed_form(-m, -np.asarray(lam, dtype=float)).conj()
    lam = np.asarray(lam, dtype=float)
    if m == 0:
        g2 = np.exp(2.0 * log_gamma(0.25 - 0.5j * lam).real)
        alpha = (g2 / (2.0 * math.pi**1.5)).astype(complex)
        zero = np.zeros_like(alpha)
        out = CoefficientSet(alpha, zero, zero, zero)
    else:
        mu = _closed_mu(m, lam)
        zero = np.zeros_like(mu)
        out = CoefficientSet(zero, zero, mu, -1j * np.conj(mu))
    if lam.ndim == 0:
        out = CoefficientSet(*(complex(c) for c in (out.alpha, out.beta, out.mu, out.nu)))
    return out


def density(m: int, lam, cfg: QuadratureConfig = QuadratureConfig(),
            backend: Backend | str = Backend.QUADRATURE):
    """Posmom density p_m(lambda) = |alpha|^2 + |beta|^2 + |mu|^2 + |nu|^2."""
    out = coefficients(m, lam, cfg, backend).total()
    return float(out) if np.ndim(out) == 0 else out


def density_closed_form(m: int, lam):
    """
    Analytic density for m in {0, 1, 3, 5}:

    m = 0: |Gamma(1/4 - i lam/2)|^4 / (4 pi^3)
    m = 1: sech(pi lam)
    m = 3: 4 lam^2 sech(pi lam)
    m = 5: (1 - 4 lam^2)^2 sech(pi lam) / 4
    """
    m = abs(_check_m(m))
    lam = np.asarray(lam, dtype=float)
    if m not in CLOSED_FORM_M:
        raise ValueError(f"no closed form for m = {m}; available for |m| in {CLOSED_FORM_M}")
    if m == 0:
        g2 = np.exp(2.0 * log_gamma(0.25 - 0.5j * lam).real)
        out = g2 * g2 / (4.0 * math.pi**3)
    else:
        sech = 1.0 / np.cosh(math.pi * lam)
        poly = {1: 1.0, 3: 4.0 * lam**2, 5: 0.25 * (1.0 - 4.0 * lam**2) ** 2}[m]
        out = poly * sech
    return float(out) if out.ndim == 0 else out


def default_lambda_span(m: int) -> float:
    """Half-width beyond which p_m is negligible for normalisation purposes."""
    return 0.5 * abs(m) + 20.0


def density_integral(m: int, power: int = 0, lambda_max: float | None = None,
                     cfg: QuadratureConfig = QuadratureConfig(),
                     backend: Backend | str = Backend.QUADRATURE) -> float:
    """
    Truncated moment int_{-L}^{L} lambda^power p_m(lambda) dlambda.

    The cut at L is part of the definition, so no tail term enters the
    error budget. L defaults to |m|/2 + 20.
    """
    span = default_lambda_span(m) if lambda_max is None else float(lambda_max)
    # inner values carry ~1e-12 noise; asking the outer rule for more is futile
    outer = cfg.replace(line_truncation=span, abs_tol=max(cfg.abs_tol, 1e-9),
                        rel_tol=max(cfg.rel_tol, 1e-9))

    def integrand(lam):
        return lam**power * density(m, lam, cfg, backend)

    return float(integrate_line(integrand, outer, tail_bound=0.0).value.real)


class Moments(NamedTuple):
    mean: float
    variance: float


def moments(m: int, cfg: QuadratureConfig = QuadratureConfig(), lambda_max: float | None = None,
            backend: Backend | str = Backend.QUADRATURE) -> Moments:
    """First moment and second moment about zero of p_m over |lambda| <= lambda_max."""
    mean = density_integral(m, 1, lambda_max, cfg, backend)
    second = density_integral(m, 2, lambda_max, cfg, backend)
    return Moments(mean, second)


def classical_density(m: int, lam):
    """Arcsine law of a uniformly phased sinusoid of amplitude |m|/2; zero outside."""
    amp = 0.5 * abs(_check_m(m))
    if amp == 0:
        raise ValueError("classical density needs m != 0")
    lam = np.asarray(lam, dtype=float)
    inside = np.abs(lam) < amp
    out = np.zeros_like(lam)
    out[inside] = 1.0 / (math.pi * np.sqrt(amp**2 - lam[inside] ** 2))
    return float(out) if out.ndim == 0 else out


def classical_cdf(m: int, lam):
    amp = 0.5 * abs(_check_m(m))
    if amp == 0:
        raise ValueError("classical distribution needs m != 0")
    x = np.clip(np.asarray(lam, dtype=float) / amp, -1.0, 1.0)
    out = 0.5 + np.arcsin(x) / math.pi
    return float(out) if out.ndim == 0 else out
