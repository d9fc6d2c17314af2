"""Posmom (position-momentum) spectral densities of angular-momentum states on a circle."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    Backend,
    CoefficientSet,
    DomainError,
    ParitySector,
    classical_cdf,
    classical_density,
    coefficient_integral_I,
    coefficients,
    coefficients_closed_form,
    density,
    density_closed_form,
    density_integral,
    moments,
    parity_basis,
    xi,
)
from .quadrature import QuadratureConfig, QuadratureError  # noqa: E402
from .scan import (  # noqa: E402
    DensityTable,
    ScanError,
    classical_comparison,
    count_extrema,
    oscillator_comparison,
    scan_density,
)

__all__ = [
    "Backend",
    "CoefficientSet",
    "DomainError",
    "ParitySector",
    "QuadratureConfig",
    "QuadratureError",
    "DensityTable",
    "ScanError",
    "classical_cdf",
    "classical_density",
    "coefficient_integral_I",
    "coefficients",
    "coefficients_closed_form",
    "density",
    "density_closed_form",
    "density_integral",
    "moments",
    "parity_basis",
    "xi",
    "scan_density",
    "count_extrema",
    "oscillator_comparison",
    "classical_comparison",
]
