import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posmom.specfun import (
    ConvergenceError,
    PoleError,
    gamma,
    hermite_function,
    hermite_momentum_density,
    hyp2f1_at_minus_one,
    log_gamma,
)

finite = dict(allow_nan=False, allow_infinity=False)


def mp_loggamma(z):
    return complex(mp.loggamma(mp.mpc(z.real, z.imag)))


@pytest.mark.parametrize("z", [0.5, 1.0, 2.5, 10.0, 0.25 - 0.5j, 0.25 + 40j, -2.5 + 0.1j, 3 - 100j, 1e-3 + 1e-3j])
def test_log_gamma_matches_mpmath(z):
    got = log_gamma(z)
    want = mp_loggamma(complex(z))
    assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


@given(st.floats(-30, 30, **finite), st.floats(-60, 60, **finite))
@settings(max_examples=200, deadline=None)
def test_log_gamma_property_vs_mpmath(x, y):
    z = complex(x, y)
    if y == 0 and x <= 0 and x == round(x):
        return
    want = mp_loggamma(z)
    assert abs(log_gamma(z) - want) <= 1e-12 * max(1.0, abs(want))


@given(st.floats(0.1, 50, **finite), st.floats(-50, 50, **finite))
@settings(max_examples=200, deadline=None)
def test_gamma_recurrence(x, y):
    z = complex(x, y)
    lhs = log_gamma(z + 1)
    rhs = log_gamma(z) + np.log(z)
    # principal branches: equal, not merely equal modulo 2 pi i, for Re z > 0
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_gamma_known_values():
    assert log_gamma(1.0) == 0
    assert gamma(0.5).real == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma(5.0).real == pytest.approx(24.0, rel=1e-14)
    assert abs(gamma(0.25) - float(mp.gamma(0.25))) < 1e-13
    assert abs(gamma(0.25).real - 3.625609908) < 1e-8


@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0, 5.0])
def test_gamma_reflection_on_critical_line(x):
    # |Gamma(1/2 + ix)|^2 cosh(pi x) / pi = 1
    assert abs(abs(gamma(0.5 + 1j * x)) ** 2 * math.cosh(math.pi * x) / math.pi - 1) < 1e-10


def test_log_gamma_vectorised_shape():
    z = np.array([[1.0, 2.0], [0.5 + 1j, 3 - 2j]])
    out = log_gamma(z)
    assert out.shape == (2, 2)
    assert out[1, 1] == pytest.approx(log_gamma(3 - 2j), rel=1e-15)


@pytest.mark.parametrize("z", [0, -1, -7])
def test_log_gamma_poles(z):
    with pytest.raises(PoleError):
        log_gamma(z)


@pytest.mark.parametrize(
    "a,b,c",
    [
        (0.5 + 0.3j, 0.5, 1.0 + 0.3j),
        (0.5 - 2j, 1.5, 2.0 - 2j),
        (0.5 + 7j, 3.0, 3.5 + 7j),
        (1.0, 1.0, 2.0),
        (0.5, 10.5, 11.0),
    ],
)
def test_hyp2f1_matches_mpmath(a, b, c):
    want = complex(mp.hyp2f1(a, b, c, -1))
    got = hyp2f1_at_minus_one(a, b, c)
    assert abs(got - want) <= 1e-13 * max(1.0, abs(want))


def test_hyp2f1_b_equals_c():
    a = 0.3 + 0.2j
    for b in (0.7, 2.5 - 1j, 11.0):
        assert abs(hyp2f1_at_minus_one(a, b, b) - 2 ** (-a)) < 1e-15


def test_hyp2f1_kummer():
    # F(a, b; 1+a-b; -1) = Gamma(1+a-b) Gamma(1+a/2) / (Gamma(1+a) Gamma(1+a/2-b))
    a, b = 1.0, 0.5
    want = np.exp(log_gamma(1 + a - b) + log_gamma(1 + a / 2) - log_gamma(1 + a) - log_gamma(1 + a / 2 - b))
    assert abs(hyp2f1_at_minus_one(a, b, 1 + a - b) - want) < 1e-14


def cesaro_direct(a, b, c, n_terms=10_000):
    """Direct series at z = -1, summed by averaging the second half of the partial sums."""
    n = np.arange(n_terms - 1)
    ratios = (a + n) * (b + n) / ((c + n) * (n + 1)) * -1.0
    terms = np.concatenate([[1.0], np.cumprod(ratios)])
    partial = np.cumsum(terms)
    return partial[n_terms // 2:].mean()


@pytest.mark.parametrize("a,b,c", [(0.5, 1.0, 1.5), (0.5, 1.5, 2.0), (0.25, 0.75, 1.0), (0.5, 3.0, 3.5)])
def test_hyp2f1_matches_cesaro_direct_sum(a, b, c):
    # Re(c - a - b) = 0, as for the posmom parameters: the raw series converges only conditionally
    assert abs(hyp2f1_at_minus_one(a, b, c) - cesaro_direct(a, b, c)) < 1e-6


def test_hyp2f1_log2_identity():
    # 2F1(1, 1; 2; -x) = ln(1 + x)/x
    assert hyp2f1_at_minus_one(1, 1, 2).real == pytest.approx(math.log(2.0), rel=1e-15)


def test_hyp2f1_broadcasts():
    lam = np.linspace(-3, 3, 7)
    out = hyp2f1_at_minus_one(0.5 + 1j * lam, 1.5, 2.0 + 1j * lam)
    assert out.shape == lam.shape
    assert out[2] == pytest.approx(hyp2f1_at_minus_one(0.5 + 1j * lam[2], 1.5, 2.0 + 1j * lam[2]))


def test_hyp2f1_pole_and_cap():
    with pytest.raises(PoleError):
        hyp2f1_at_minus_one(0.5, 0.5, -2)
    with pytest.raises(ConvergenceError) as info:
        hyp2f1_at_minus_one(0.5, 0.5, 1.5, max_terms=3)
    assert info.value.terms == 3
    assert info.value.partial_sum is not None


@pytest.mark.parametrize("n", [0, 1, 2, 5, 20])
def test_hermite_function_matches_mpmath(n):
    x = np.linspace(-6, 6, 13)
    norm = 1 / mp.sqrt(2**n * mp.factorial(n) * mp.sqrt(mp.pi))
    want = np.array([float(norm * mp.hermite(n, xv) * mp.exp(-xv * xv / 2)) for xv in x])
    assert np.allclose(hermite_function(n, x), want, atol=1e-14, rtol=1e-12)


def test_hermite_density_values():
    assert hermite_momentum_density(0, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
    assert hermite_momentum_density(1, 0.0) == 0.0


def count_zeros(values):
    """Sign changes after dropping exact zeros; each simple zero counts once."""
    nz = values[values != 0]
    return int(np.sum(np.signbit(nz[1:]) != np.signbit(nz[:-1])))


@given(st.integers(0, 60), st.floats(0.3, 4.0, **finite))
@settings(max_examples=60, deadline=None)
def test_hermite_zero_count(n, scale):
    half = scale * math.sqrt(2 * n + 1) * 1.2
    k = math.ceil(half / (scale / 50))
    p = np.arange(-k, k + 1) * (scale / 50)
    assert count_zeros(hermite_function(n, p / scale)) == n
    # the density vanishes exactly where phi_n does and is positive elsewhere
    assert np.all(hermite_momentum_density(n, p, scale) >= 0)


@pytest.mark.parametrize("n,scale", [(0, 1.0), (3, 2.0), (20, 2.0), (20, 3.2), (150, 1.0)])
def test_hermite_density_normalised(n, scale):
    x = np.linspace(-60, 60, 60001)
    h = hermite_momentum_density(n, x, scale)
    assert np.all(h >= 0)
    assert np.trapezoid(h, x) == pytest.approx(1.0, abs=1e-10)
    assert np.trapezoid(x * x * h, x) == pytest.approx((n + 0.5) * scale**2, rel=1e-9)


@given(st.integers(0, 40), st.floats(0.2, 5, **finite))
@settings(max_examples=40, deadline=None)
def test_hermite_density_even(n, scale):
    x = np.linspace(0, 10, 41)
    assert np.allclose(hermite_momentum_density(n, x, scale), hermite_momentum_density(n, -x, scale))


@pytest.mark.parametrize("n,scale", [(-1, 1.0), (201, 1.0), (2, 0.0), (2, -1.0)])
def test_hermite_density_domain(n, scale):
    with pytest.raises(ValueError):
        hermite_momentum_density(n, 0.0, scale)
