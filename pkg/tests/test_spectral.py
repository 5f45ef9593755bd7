# tests/test_spectral.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from solver.errors import ConstraintViolation, SpectralUsageError, ZeroModePolicyError
from solver.spectral import (
    ComplexField2D,
    Grid2D,
    HOMOGENEOUS,
    INHOMOGENEOUS,
    Sector,
    abs_power,
    apply_multiplier,
    backward,
    curl_scalar,
    dealias,
    div_free_project,
    divergence,
    dyadic_range,
    forward,
    fourier_field,
    gradient,
    inv_laplacian,
    l2_norm,
    laplacian,
    lp_project,
    omega_family,
    physical_field,
    sector_project,
    shell_norms,
)


def _random_coeffs(grid, rng, components=None):
    shape = (grid.n, grid.n) if components is None else (components, grid.n, grid.n)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@given(st.integers(0, 2 ** 31 - 1))
@settings(max_examples=25, deadline=None)
def test_parseval_matches_riemann_sum(seed):
    grid = Grid2D(2.0 * math.pi * 3.0, 16)
    f = np.random.default_rng(seed).standard_normal((grid.n, grid.n))
    direct = math.sqrt(float(np.sum(np.abs(f) ** 2)) * grid.dx ** 2)
    assert l2_norm(physical_field(grid, f)) == pytest.approx(direct, rel=1e-12)


def test_forward_backward_inverse(small_grid):
    rng = np.random.default_rng(0)
    f = rng.standard_normal((2, small_grid.n, small_grid.n))
    assert np.allclose(backward(small_grid, forward(small_grid, f)).real, f, atol=1e-13)


def test_coefficients_do_not_depend_on_resolution():
    L = 2.0 * math.pi * 2.0
    coarse, fine = Grid2D(L, 16), Grid2D(L, 32)
    c_coarse = forward(coarse, np.cos(coarse.coords[0] * coarse.k_min))
    c_fine = forward(fine, np.cos(fine.coords[0] * fine.k_min))
    assert abs(c_coarse[1, 0]) == pytest.approx(abs(c_fine[1, 0]), rel=1e-12)


def test_grid_rejects_bad_parameters():
    with pytest.raises(SpectralUsageError):
        Grid2D(2.0 * math.pi, 15)
    with pytest.raises(SpectralUsageError):
        Grid2D(-1.0, 16)


def test_field_shape_mismatch_raises(small_grid):
    with pytest.raises(SpectralUsageError):
        ComplexField2D(small_grid, np.zeros((8, 8)))


def test_dealias_mask_excludes_nyquist(small_grid):
    m = small_grid.dealias_mask
    assert not np.any(m & small_grid.nyquist_mask)
    assert m[0, 0]


def test_shell_norms_sum_to_l2(grid32):
    c = _random_coeffs(grid32, np.random.default_rng(1))
    c[0, 0] = 0.0
    field = fourier_field(grid32, c)
    shells = shell_norms(field)
    assert math.sqrt(sum(v ** 2 for v in shells.values())) == pytest.approx(l2_norm(field), rel=1e-12)


def test_lp_project_rejects_non_dyadic_and_out_of_range(grid32):
    field = fourier_field(grid32, _random_coeffs(grid32, np.random.default_rng(2)))
    with pytest.raises(SpectralUsageError):
        lp_project(field, 3.0)
    with pytest.raises(SpectralUsageError):
        lp_project(field, 2.0 ** 20)
    N = 2.0 ** dyadic_range(grid32, INHOMOGENEOUS)[0]
    assert l2_norm(lp_project(field, N, INHOMOGENEOUS)) > 0.0


def test_singular_multiplier_needs_policy(small_grid):
    c = _random_coeffs(small_grid, np.random.default_rng(3))
    field = fourier_field(small_grid, c)
    with pytest.raises(ZeroModePolicyError):
        apply_multiplier(abs_power(-1.0), field)
    out = apply_multiplier(abs_power(-1.0), field, zero_mode_policy="annihilate")
    assert out.samples[0, 0] == 0.0
    passed = apply_multiplier(abs_power(-1.0), field, zero_mode_policy="pass")
    assert passed.samples[0, 0] == c[0, 0]


def test_div_free_projection_is_idempotent_and_divergence_free(grid32):
    v = fourier_field(grid32, _random_coeffs(grid32, np.random.default_rng(4), components=2))
    p = div_free_project(v)
    assert np.allclose(div_free_project(p).samples, p.samples, atol=1e-12)
    assert np.max(np.abs(divergence(p).samples)) < 1e-12


def test_curl_of_gradient_vanishes(grid32):
    f = fourier_field(grid32, _random_coeffs(grid32, np.random.default_rng(5)))
    assert np.max(np.abs(curl_scalar(gradient(f)).samples)) < 1e-12


def test_inv_laplacian_inverts_laplacian(grid32):
    c = _random_coeffs(grid32, np.random.default_rng(6))
    c[0, 0] = 0.0
    f = fourier_field(grid32, c)
    back = laplacian(inv_laplacian(f))
    assert np.allclose(back.samples, c, atol=1e-10)


def test_inv_laplacian_refuses_nonzero_mean(small_grid):
    c = np.zeros((small_grid.n, small_grid.n), complex)
    c[0, 0] = 1.0
    with pytest.raises(ConstraintViolation):
        inv_laplacian(fourier_field(small_grid, c))


def test_sectors_cover_the_plane(grid32):
    gamma = math.pi / 4.0
    c = _random_coeffs(grid32, np.random.default_rng(7))
    field = fourier_field(grid32, c)
    covered = np.zeros((grid32.n, grid32.n), bool)
    for om in omega_family(gamma):
        covered |= np.abs(sector_project(field, Sector(gamma, tuple(om))).samples) > 0
    assert np.all(covered[grid32.kabs > 0])


def test_sector_requires_unit_direction():
    with pytest.raises(SpectralUsageError):
        Sector(0.5, (1.0, 1.0))


def test_dealias_keeps_low_modes(small_grid):
    c = np.zeros((small_grid.n, small_grid.n), complex)
    c[1, 0] = 1.0
    c[small_grid.n // 2, 0] = 1.0
    out = dealias(fourier_field(small_grid, c)).samples
    assert out[1, 0] == 1.0
    assert out[small_grid.n // 2, 0] == 0.0


def test_homogeneous_shells_start_below_one(small_grid):
    # k_min = 1/2 en una caja de periodo 4π
    assert dyadic_range(small_grid, HOMOGENEOUS)[0] == -1
    assert dyadic_range(small_grid, INHOMOGENEOUS)[0] == 0
