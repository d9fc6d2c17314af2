"""
Complex special functions used by the posmom coefficient formulas.

Everything here is vectorised over numpy arrays and works in double
precision. Quantities that can over- or underflow (Gamma ratios at large
imaginary argument, Hermite functions of high order) are carried in
logarithmic or weighted form.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "PoleError",
    "ConvergenceError",
    "log_gamma",
    "gamma",
    "hyp2f1_at_minus_one",
    "hermite_function",
    "hermite_momentum_density",
]

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# B_{2k} / (2k (2k-1)) for k = 1..10
_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
)

# Stirling is accurate to well below 1e-16 once Re z exceeds this.
_SHIFT_TO = 16.0

HYP2F1_MAX_TERMS = 10_000


class PoleError(ValueError):
    """Argument sits on a pole of Gamma (a non-positive integer)."""


class ConvergenceError(ArithmeticError):
    """A series failed to meet its tail bound within the iteration cap."""

    def __init__(self, message, partial_sum=None, terms=0):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms = terms


def _check_poles(z: np.ndarray) -> None:
    on_axis = (z.imag == 0.0) & (z.real <= 0.0) & (z.real == np.round(z.real))
    if np.any(on_axis):
        bad = z[on_axis].real[0]
        raise PoleError(f"Gamma has a pole at z = {bad:g}")


def log_gamma(z):
    """
    Principal branch of log Gamma(z) for complex z.

    Uses the upward recurrence to push Re z past 16 and then the Stirling
    series with ten Bernoulli terms. The recurrence is summed with principal
    logarithms, which reproduces the analytic continuation cut along the
    negative real axis (the same branch as ``scipy.special.loggamma``).

    Parameters
    ----------
    z : complex or array_like
        Argument; must not be a non-positive integer.

    Returns
    -------
    complex or ndarray of complex
    """
    z_arr = np.asarray(z, dtype=complex)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr)
    _check_poles(z_arr)

    shifts = np.maximum(0, np.ceil(_SHIFT_TO - z_arr.real)).astype(int)
    correction = np.zeros_like(z_arr)
    w = z_arr.copy()
    for k in range(int(shifts.max(initial=0))):
        active = shifts > k
        correction[active] += np.log(w[active])
        w[active] += 1.0

    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for coeff in reversed(_STIRLING):
        series = series * inv2 + coeff
    result = (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series * inv - correction
    return complex(result[0]) if scalar else result


def gamma(z):
    """Gamma(z) = exp(log_gamma(z)); overflows like the true function does."""
    return np.exp(log_gamma(z))


def hyp2f1_at_minus_one(a, b, c, *, tol: float = 1e-15, max_terms: int = HYP2F1_MAX_TERMS):
    """
    Gauss hypergeometric function 2F1(a, b; c; -1).

    At z = -1 the defining series converges at best conditionally (for the
    parameters in the posmom closed form Re(c - a - b) = 0), so the sum is
    taken after the Pfaff transformation

        2F1(a, b; c; -1) = 2**(-a) * 2F1(a, c - b; c; 1/2),

    whose series converges geometrically with ratio tending to 1/2.

    Parameters broadcast against each other. Summation stops for an element
    once the term ratio has dropped below 0.9 and the geometric tail bound
    ``|t| r / (1 - r)`` is below ``tol * |sum|``.

    Raises
    ------
    PoleError
        If c is a non-positive integer.
    ConvergenceError
        If any element has not converged after ``max_terms`` terms.
    """
    a_arr, b_arr, c_arr = np.broadcast_arrays(
        np.asarray(a, dtype=complex), np.asarray(b, dtype=complex), np.asarray(c, dtype=complex)
    )
    scalar = a_arr.ndim == 0
    shape = a_arr.shape
    a_arr, b_arr, c_arr = (np.atleast_1d(v).ravel() for v in (a_arr, b_arr, c_arr))
    _check_poles(c_arr)

    b2 = c_arr - b_arr
    total = np.ones_like(a_arr)
    term = np.ones_like(a_arr)
    active = np.ones(a_arr.shape, dtype=bool)
    n = 0
    while np.any(active):
        if n >= max_terms:
            raise ConvergenceError(
                f"2F1 series at 1/2 not converged after {max_terms} terms",
                partial_sum=total,
                terms=n,
            )
        idx = np.nonzero(active)[0]
        an, bn, cn = a_arr[idx] + n, b2[idx] + n, c_arr[idx] + n
        ratio = an * bn / (cn * (n + 1)) * 0.5
        term[idx] = term[idx] * ratio
        total[idx] += term[idx]
        n += 1
        # ratio of the *next* term bounds the tail once it is below 1
        nxt = np.abs((an + 1) * (bn + 1) / ((cn + 1) * (n + 1)) * 0.5)
        tail = np.where(nxt < 0.9, np.abs(term[idx]) * nxt / (1.0 - np.minimum(nxt, 0.9)), np.inf)
        done = tail <= tol * np.abs(total[idx])
        active[idx[done]] = False

    result = np.exp(-a_arr * math.log(2.0)) * total
    if scalar:
        return complex(result[0])
    return result.reshape(shape)


def hermite_function(n: int, x):
    """
    Normalised Hermite function phi_n(x) = H_n(x) exp(-x^2/2) / sqrt(2^n n! sqrt(pi)).

    Built from the three-term recurrence on the weighted functions
    themselves, so no factorial or bare Hermite polynomial is ever formed.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.zeros_like(x)
    cur = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    for k in range(n):
        prev, cur = cur, math.sqrt(2.0 / (k + 1)) * x * cur - math.sqrt(k / (k + 1)) * prev
    return cur


def hermite_momentum_density(n: int, p, scale: float = 1.0):
    """
    Momentum density |phi_n(p / scale)|^2 / scale of the n-th oscillator state.

    ``scale`` is the momentum unit sqrt(m hbar omega); the density integrates
    to one over the real line for every scale.
    """
    if not 0 <= n <= 200:
        raise ValueError(f"oscillator level must lie in [0, 200], got {n}")
    if scale <= 0:
        raise ValueError("scale must be positive")
    h = hermite_function(n, np.asarray(p, dtype=float) / scale)
    return h * h / scale
