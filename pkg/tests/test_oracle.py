import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posmom.core import ParitySector, parity_basis
from posmom.oracle import (
    CircleState,
    GridSymmetryError,
    angular_state,
    apply_parity,
    apply_posmom,
    eigenvalue_residual,
    gaussian_window,
    inner,
    norm,
    posmom_second_moment,
    reconstruct,
    sector_orthogonality,
)
from posmom.scan import lambda_grid


def test_angular_state_normalised_and_orthogonal():
    a, b = angular_state(2, 256), angular_state(3, 256)
    assert norm(a) == pytest.approx(1.0, abs=1e-14)
    assert abs(inner(a, b)) < 1e-14


@pytest.mark.parametrize("lam", [0.5, 1.5, 3.0])
def test_eigen_residual_small_and_converging(lam):
    coarse = eigenvalue_residual(lam, 4096)
    fine = eigenvalue_residual(lam, 8192)
    assert coarse < 1e-4
    # fourth-order stencil: ideally 16x
    assert coarse / fine >= 8


def test_posmom_matrix_element():
    # Q_x couples m to m +- 2; <3|Q_x|5> = -i and <5|Q_x|3> = i exactly
    a, b = angular_state(3, 1024), angular_state(5, 1024)
    assert abs(inner(a, apply_posmom(b)) + 1j) < 1e-6
    assert abs(inner(b, apply_posmom(a)) - 1j) < 1e-6
    assert abs(inner(angular_state(4, 1024), apply_posmom(a))) < 1e-12


@pytest.mark.parametrize("m", range(7))
def test_second_moment_grid(m):
    assert posmom_second_moment(angular_state(m, 4096)) == pytest.approx((m * m + 1) / 8, abs=1e-7)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
@pytest.mark.parametrize("which", ["m_x", "m_y"])
def test_parity_commutes_with_posmom(m, which):
    phi = angular_state(m, 2048)
    a = apply_parity(which, apply_posmom(phi)).samples
    b = apply_posmom(apply_parity(which, phi)).samples
    assert np.linalg.norm(a - b) < 1e-10 * np.linalg.norm(apply_posmom(phi).samples)


@given(st.integers(-8, 8), st.sampled_from(["m_x", "m_y"]))
@settings(max_examples=20, deadline=None)
def test_parity_is_involution(m, which):
    s = angular_state(m, 256)
    twice = apply_parity(which, apply_parity(which, s))
    assert np.array_equal(twice.samples, s.samples)


def test_parity_action_on_angular_state():
    s = angular_state(3, 256)
    # m_x: e^{i m phi} -> e^{-i m phi}
    assert np.allclose(apply_parity("m_x", s).samples, angular_state(-3, 256).samples, atol=1e-13)
    with pytest.raises(ValueError):
        apply_parity("m_z", s)


def test_grid_offset_must_respect_mirrors():
    n = 256
    s = CircleState.from_function(lambda p: np.exp(1j * p), n, grid_offset=math.pi / (4 * n))
    with pytest.raises(GridSymmetryError):
        apply_parity("m_x", s)


@pytest.mark.parametrize(
    "n,shape",
    [(60, 60), (130, 130), (256, 255)],
)
def test_circle_state_validation(n, shape):
    with pytest.raises(ValueError):
        CircleState(np.zeros(shape, dtype=complex), n, math.pi / n)


def test_circle_state_rejects_boundary_points():
    with pytest.raises(ValueError):
        CircleState(np.zeros(64, dtype=complex), 64, 0.0)


def test_circle_state_read_only():
    s = angular_state(1, 64)
    with pytest.raises(ValueError):
        s.samples[0] = 0


@pytest.mark.parametrize("m", [0, 1])
def test_reconstruction(m):
    rec = reconstruct(m, lambda_grid(-10, 10, 0.01), n_points=1024)
    assert rec.l2_residual < 1e-3
    assert set(rec.sector_parts) == set(ParitySector)


def test_reconstruction_sector_parts_vanish_by_parity():
    rec = reconstruct(1, lambda_grid(-10, 10, 0.02), n_points=512)
    assert np.max(np.abs(rec.sector_parts[ParitySector.XY])) == 0
    assert np.max(np.abs(rec.sector_parts[ParitySector.XBAR_Y])) > 0.1


def test_reconstruction_empty_grid_is_the_whole_state():
    rec = reconstruct(2, [], n_points=256)
    assert rec.l2_residual == pytest.approx(1.0, abs=1e-12)


def test_gaussian_window_normalised():
    g = gaussian_window(0.7, 0.3)
    x = np.linspace(-10, 10, 20001)
    assert np.trapezoid(g(x) ** 2, x) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize(
    "s1,s2,want",
    [
        (ParitySector.XY, ParitySector.XY, 1.0),
        (ParitySector.XBAR_Y, ParitySector.XBAR_Y, 1.0),
        (ParitySector.XY, ParitySector.XBAR_YBAR, 0.0),
        (ParitySector.XBAR_Y, ParitySector.X_YBAR, 0.0),
        (ParitySector.XBAR_YBAR, ParitySector.X_YBAR, 0.0),
        (ParitySector.XY, ParitySector.XBAR_Y, 0.0),
    ],
)
def test_sector_orthogonality(s1, s2, want):
    val = sector_orthogonality(gaussian_window(1.0), (s1, s2), n_points=4096, lambda_step=0.02)
    assert abs(val - want) < 1e-6


def test_posmom_on_constant():
    # derivative term vanishes: Q_x Phi_0 = (i/2) cos 2phi Phi_0
    s = angular_state(0, 512)
    want = 0.5j * np.cos(2 * s.phi) / math.sqrt(2 * math.pi)
    assert np.max(np.abs(apply_posmom(s).samples - want)) < 1e-12


def test_posmom_expectation_vanishes():
    s = angular_state(4, 2048)
    assert abs(inner(s, apply_posmom(s))) < 1e-10


def test_m_x_negates_xbar_ybar_samples():
    s = CircleState.from_function(lambda p: parity_basis(ParitySector.XBAR_YBAR, 0.9, p), 512)
    # samples at phi and 2 pi - phi are computed from differently rounded angles
    scale = np.max(np.abs(s.samples))
    assert np.max(np.abs(apply_parity("m_x", s).samples + s.samples)) < 1e-12 * scale
    assert np.max(np.abs(apply_parity("m_y", s).samples + s.samples)) < 1e-12 * scale


@given(st.integers(-6, 6), st.sampled_from(["m_x", "m_y"]))
@settings(max_examples=20, deadline=None)
def test_parity_preserves_norm(m, which):
    s = CircleState.from_function(lambda p: np.exp(1j * m * p) * (1 + 0.3 * np.cos(p) ** 3), 256)
    assert norm(apply_parity(which, s)) == norm(s)


@pytest.mark.parametrize("m", range(7))
def test_reconstruction_improves_with_grid(m):
    grids = [lambda_grid(-lim, lim, h) for lim, h in ((2, 0.2), (4, 0.1), (6, 0.05), (9, 0.02))]
    res = [reconstruct(m, g, n_points=1024).l2_residual for g in grids]
    assert all(b <= 1.1 * a for a, b in zip(res, res[1:])), res
