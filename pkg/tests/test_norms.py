# tests/test_norms.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from solver.norms import (
    CutoffFunction,
    SpaceTimeGrid,
    data_norm_DT,
    ell1_embedding_constant,
    embedding_constant,
    loglog_slope,
    magic_norm,
    sobolev_norm,
    spacetime_backward,
    spacetime_forward,
    sup_time_sobolev,
    xsb_norm,
    xsb_shell_table,
)
from solver.initial_data import EMSplit, current, make_data, split_em
from solver.spectral import Grid2D, forward, fourier_field, l2_norm


def _coeffs(grid, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal((grid.n, grid.n)) + 1j * rng.standard_normal((grid.n, grid.n))
    return c * grid.dealias_mask


def test_sobolev_zero_is_l2(grid32):
    f = fourier_field(grid32, _coeffs(grid32, 0))
    assert sobolev_norm(f, 0.0) == pytest.approx(l2_norm(f), rel=1e-12)


def test_sobolev_is_monotone_in_s(grid32):
    f = fourier_field(grid32, _coeffs(grid32, 1))
    assert sobolev_norm(f, -1.5) <= sobolev_norm(f, -0.5) <= sobolev_norm(f, 0.5)


def test_magic_norm_domain(grid32):
    f = fourier_field(grid32, _coeffs(grid32, 2))
    for T in (0.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            magic_norm(f, T)
    assert magic_norm(f, 1.0) > 0.0


@given(st.floats(2.0 ** -6, 1.0), st.floats(0.0, 1.0))
@settings(max_examples=40, deadline=None)
def test_magic_norm_grows_as_time_shrinks(T, u):
    # ‖f‖_(S) ≤ 3‖f‖_(T) para 0 < S ≤ T ≤ 1
    grid = Grid2D(16.0 * math.pi, 32)
    f = fourier_field(grid, _coeffs(grid, 3))
    S = max(T * u, 2.0 ** -8)
    assert magic_norm(f, S) <= 3.0 * magic_norm(f, T) * (1.0 + 1e-12)


def test_spacetime_transform_preserves_norm(small_grid):
    stg = SpaceTimeGrid(small_grid, 1.0, 16)
    u = np.random.default_rng(4).standard_normal((16, small_grid.n, small_grid.n))
    c = spacetime_forward(stg, u)
    direct = math.sqrt(float(np.sum(u ** 2)) * stg.dt * small_grid.dx ** 2)
    assert math.sqrt(float(np.sum(np.abs(c) ** 2))) == pytest.approx(direct, rel=1e-12)
    assert np.allclose(spacetime_backward(stg, c).real, u, atol=1e-12)


def test_spacetime_grid_validation(small_grid):
    with pytest.raises(ValueError):
        SpaceTimeGrid(small_grid, 1.0, 15)
    with pytest.raises(ValueError):
        SpaceTimeGrid(small_grid, 0.0, 16)
    with pytest.raises(ValueError):
        SpaceTimeGrid(small_grid, 1.0, 16).phase("+foo")


def test_xsb_b0_matches_parseval(small_grid):
    # con b = 0 y p = 2 las capas recomponen la norma L²; con p = 1 la acotan
    stg = SpaceTimeGrid(small_grid, 1.0, 16)
    u = np.random.default_rng(5).standard_normal((16, small_grid.n, small_grid.n))
    table = xsb_shell_table(stg, u, 0.0, "+abs")
    l2 = math.sqrt(float(np.sum(u ** 2)) * stg.dt * small_grid.dx ** 2)
    assert math.sqrt(sum(v ** 2 for v in table.values())) == pytest.approx(l2, rel=1e-12)
    assert xsb_norm(stg, u, 0.0, 0.0, 1) >= l2 * (1.0 - 1e-12)
    assert xsb_norm(stg, u, 0.0, 0.0, math.inf) <= l2 * (1.0 + 1e-12)


def test_xsb_rejects_bad_p(small_grid):
    stg = SpaceTimeGrid(small_grid, 1.0, 16)
    with pytest.raises(ValueError):
        xsb_norm(stg, np.zeros((16, small_grid.n, small_grid.n)), 0.0, 0.5, 2)


def test_embedding_constant_bounds_sup_norm(small_grid):
    stg = SpaceTimeGrid(small_grid, 1.0, 32)
    rng = np.random.default_rng(6)
    C = embedding_constant(stg)
    for _ in range(5):
        u = rng.standard_normal((32, small_grid.n, small_grid.n))
        assert sup_time_sobolev(stg, u, 0.0) <= C * xsb_norm(stg, u, 0.0, 0.5, 1) * (1.0 + 1e-10)


def test_ell1_embedding_constant_requires_ordered_exponents(small_grid):
    stg = SpaceTimeGrid(small_grid, 1.0, 16)
    with pytest.raises(ValueError):
        ell1_embedding_constant(stg, 0.5, 0.25)
    assert ell1_embedding_constant(stg, 0.25, 0.5) > 1.0


def test_cutoff_function_shape():
    rho = CutoffFunction(0.5)
    t = np.array([0.0, 0.5, 0.75, 1.0, 2.0])
    v = rho(t)
    assert v[0] == 1.0 and v[1] == 1.0
    assert 0.0 < v[2] < 1.0
    assert v[3] == 0.0 and v[4] == 0.0
    assert rho.lp_norm(math.inf) == 1.0
    assert 1.0 < rho.lp_norm(2.0) ** 2 < 2.0


def test_loglog_slope_of_power_law():
    x = [1.0, 2.0, 4.0, 8.0]
    assert loglog_slope(x, [3.0 * v ** 1.5 for v in x]) == pytest.approx(1.5)


def test_data_norm_of_magnetic_field_only(grid32):
    rng = np.random.default_rng(8)
    B3 = rng.standard_normal((grid32.n, grid32.n)) * (grid32.kabs > 0)
    B3 = np.real(np.fft.ifft2(np.fft.fft2(B3) * grid32.dealias_mask))
    zero = np.zeros((2, grid32.n, grid32.n), complex)
    split = EMSplit(grid32, zero, zero, 0.5 * B3 + 0j, 0.5 * B3 + 0j)
    report = data_norm_DT(split, 0.25)
    expected = magic_norm(fourier_field(grid32, forward(grid32, B3)), 0.25)
    assert report.D_T == pytest.approx(expected)
    assert report.tildeD_T == pytest.approx(expected)
    assert set(report.shells) == {"Edf_plus", "Edf_minus", "B3_plus", "B3_minus"}


def test_data_norm_is_below_its_split_version(grid32):
    spec = {
        "psi": {"profile": "gaussian", "amplitude": 0.2, "width": 1.5},
        "E": {"profile": "random-band", "amplitude": 0.1, "band": [0.25, 1.5]},
        "B": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0},
    }
    data = make_data(grid32, spec, seed=2)
    split = split_em(data.E0df, data.B03, current(data.psi0), grid32)
    for T in (1.0, 0.5, 0.1):
        report = data_norm_DT(split, T)
        assert report.D_T <= report.tildeD_T * (1.0 + 1e-12)
        assert report.D_T == pytest.approx(report.magic_low + report.magic_high)
    with pytest.raises(ValueError):
        data_norm_DT(split, 0.0)
