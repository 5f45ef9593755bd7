# tests/test_initial_data.py
import math

import numpy as np
import pytest

from solver.initial_data import (
    assemble_E0,
    besov_data_check,
    current,
    gauss_residual,
    gaussian_profile,
    make_data,
    potential_data,
    random_band,
    reconstruct_em,
    split_em,
    zero_data,
)
from solver.spectral import backward, divergence, forward, fourier_field

SPEC = {
    "psi": {"profile": "gaussian", "amplitude": 0.2, "width": 1.5, "momentum": [0.5, 0.0]},
    "E": {"profile": "random-band", "amplitude": 0.1, "band": [0.25, 1.5]},
    "B": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0},
}


def test_make_data_is_deterministic(grid32):
    a = make_data(grid32, SPEC, seed=3)
    b = make_data(grid32, SPEC, seed=3)
    c = make_data(grid32, SPEC, seed=4)
    assert np.array_equal(a.E0df, b.E0df)
    assert not np.array_equal(a.E0df, c.E0df)


def test_make_data_rejects_unknown_profile(grid32):
    with pytest.raises(ValueError):
        make_data(grid32, {"psi": {"profile": "triangle", "amplitude": 1.0}})


def test_free_electric_field_is_divergence_free(grid32):
    data = make_data(grid32, SPEC, seed=1)
    div = divergence(fourier_field(grid32, forward(grid32, data.E0df))).samples
    assert np.max(np.abs(div)) < 1e-12


def test_assembled_field_satisfies_gauss_law(grid32):
    data = make_data(grid32, SPEC, seed=1)
    E0 = assemble_E0(data).samples.real
    assert gauss_residual(grid32, E0, data.psi0) < 1e-10


def test_potential_reconstructs_fields(grid32):
    data = make_data(grid32, SPEC, seed=2)
    em = reconstruct_em(potential_data(data))
    assert np.allclose(em["Edf"], data.E0df, atol=1e-10)
    # B tiene media nula tras la reconstrucción desde el potencial
    B_mean_free = backward(grid32, np.where(grid32.kabs > 0, forward(grid32, data.B03), 0.0)).real
    assert np.allclose(em["B3"], B_mean_free, atol=1e-10)
    assert np.allclose(em["E"], assemble_E0(data).samples.real, atol=1e-10)


def test_current_density_is_charge(grid32):
    psi = np.stack([gaussian_profile(grid32, 0.3, 2.0), gaussian_profile(grid32, 0.1, 1.0, momentum=(0.5, 0.0))])
    J = current(psi)
    assert np.allclose(J.J0, np.sum(np.abs(psi) ** 2, axis=0))
    # |J| ≤ J⁰ punto a punto
    assert np.all(np.hypot(J.J1, J.J2) <= J.J0 + 1e-14)
    assert np.allclose(J.lowered()[0], -J.J0)


def test_random_band_support_and_rms(grid32):
    rng = np.random.default_rng(0)
    f = random_band(grid32, rng, (0.5, 1.5), 0.3)
    c = forward(grid32, f[0])
    outside = (grid32.kabs < 0.5) | (grid32.kabs > 1.5)
    assert np.max(np.abs(c[outside])) < 1e-12
    assert math.sqrt(float(np.mean(f ** 2))) == pytest.approx(0.3)


def test_split_em_recombines(grid32):
    data = make_data(grid32, SPEC, seed=5)
    split = split_em(data.E0df, data.B03, current(data.psi0), grid32)
    assert np.allclose((split.Edf_plus + split.Edf_minus).real, data.E0df, atol=1e-12)
    assert np.allclose((split.B3_plus + split.B3_minus).real, data.B03, atol=1e-12)


def test_besov_check_on_zero_data(grid32):
    report = besov_data_check(zero_data(grid32), T=0.5)
    assert report["finite"]
    assert report["em_low"] == 0.0
    assert report["charge"] == 0.0


def test_besov_check_current_ratios(grid32):
    # con una sola polarización ψ†αψ ≡ 0
    spec = {**SPEC, "psi": {**SPEC["psi"], "polarization": [1.0, 1j]}}
    data = make_data(grid32, spec, seed=6)
    assert np.max(np.abs(current(data.psi0).spatial)) > 0.0
    report = besov_data_check(data, T=0.25)
    assert report["finite"]
    assert report["current_low_ratio"] > 0.0
    assert report["current_h_minus_3_2_ratio"] <= 1.0 + 1e-12
