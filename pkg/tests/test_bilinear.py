# tests/test_bilinear.py
import json
import math

import numpy as np
import pytest

from checks.bilinear import (
    BilinearPoint,
    basic_bound,
    bilinear_lattice,
    bilinear_max_exp,
    cutoff_lattice,
    cutoff_sweep,
    estimate_bilinear_constant,
    free_wave,
    null_ray_bound,
    product_coefficients,
    product_lattice,
    sobolev_growth,
    sobolev_product_ratio,
    sweep_plan,
    verify_embedding,
    weighted_product_coefficients,
)
from checks.sampling import VerifierConfig, WavePacket
from solver.initial_data import gaussian_profile
from solver.spectral import Grid2D


def _ones(xi1, xi2):
    return np.ones(np.broadcast_shapes(xi1.shape[:-1], xi2.shape[:-1]))


def test_product_with_constant_keeps_norm():
    stg = bilinear_lattice(1.0, 1.0)
    c1 = np.zeros((stg.nt, stg.grid.n, stg.grid.n), complex)
    c1[0, 0, 0] = 1.0
    c2 = WavePacket(2.0, 1.0).sample(stg, np.random.default_rng(0))
    C = product_coefficients(stg, c1, c2)
    volume = product_lattice(stg).volume
    assert np.linalg.norm(C) == pytest.approx(np.linalg.norm(c2) / math.sqrt(volume), rel=1e-10)


@pytest.mark.parametrize("conjugate", [True, False])
def test_direct_sum_matches_fft_product(conjugate):
    stg = bilinear_lattice(2.0, 1.0)
    rng = np.random.default_rng(1)
    c1 = WavePacket(2.0, 1.0, 1).sample(stg, rng)
    c2 = WavePacket(1.0, 1.0, -1).sample(stg, rng)
    fast = product_coefficients(stg, c1, c2, conjugate=conjugate)
    direct = weighted_product_coefficients(stg, c1, c2, _ones, conjugate=conjugate)
    assert np.allclose(fast, direct, atol=1e-12)


def test_basic_bound_symmetric_in_inputs():
    for which in ("input-modulation", "median-modulation", "sobolev"):
        a = basic_bound(which, 4.0, 2.0, 8.0, 2.0, 1.0, 4.0)
        b = basic_bound(which, 4.0, 2.0, 2.0, 8.0, 4.0, 1.0)
        assert float(a) == pytest.approx(float(b))
    with pytest.raises(ValueError):
        basic_bound("strichartz", 1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


def test_sweep_plan_and_unknown_estimate():
    plan = sweep_plan("input-modulation", 2)
    assert [p[0] for p in plan] == ["N", "L1"]
    assert plan[0][1] == [1.0, 2.0, 4.0]
    assert isinstance(plan[0][2](2.0), BilinearPoint)
    with pytest.raises(ValueError):
        sweep_plan("strichartz", 2)
    with pytest.raises(ValueError):
        estimate_bilinear_constant("strichartz", VerifierConfig(trials=10, smoke=True))


def test_smoke_caps_the_exponent(telemetry_dir):
    cfg = VerifierConfig(trials=10, smoke=True, n_max_exp=6)
    assert bilinear_max_exp(cfg) == 2
    events = [json.loads(l) for l in (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()]
    assert events[-1]["event"] == "bilinear_exponent_capped"


def test_full_runs_reach_the_requested_exponent(telemetry_dir):
    cfg = VerifierConfig(trials=1000, n_max_exp=6)
    assert bilinear_max_exp(cfg) == 6
    assert not (telemetry_dir / "events.jsonl").exists()
    basic = dict((p, v) for p, v, _ in sweep_plan("sobolev", 6))
    assert basic["N"][-1] == 64.0 and basic["L1"][-1] == 64.0
    null_ray = dict((p, v) for p, v, _ in sweep_plan("null-ray", 6))
    assert null_ray["r"] == [1.0, 2.0, 4.0, 8.0, 16.0]
    assert null_ray["L1"][-1] == 64.0
    anisotropic = {p: (v, build) for p, v, build in sweep_plan("anisotropic", 6)}
    assert anisotropic["width"][0][-1] == 16.0
    assert anisotropic["N"][0][-1] == 64.0
    assert anisotropic["N"][1](64.0).N1 == 64.0


def test_lattice_holds_the_product_supports():
    stg = bilinear_lattice(64.0, 1.0)
    assert stg.nt % 2 == 0
    assert stg.nt >= 4 * (64 + 1) + 4
    assert stg.grid.n == 256
    assert product_lattice(stg).dtype == np.complex64
    assert product_lattice(bilinear_lattice(2.0, 1.0)).dtype == np.complex128


def test_bound_scalings():
    # L₁ = L_min: cuadruplicar L₁ dobla la cota
    for L2 in (4.0, 16.0):
        grow = basic_bound("input-modulation", 4.0, 1.0, 8.0, 8.0, 4.0, L2) / basic_bound("input-modulation", 4.0, 1.0, 8.0, 8.0, 1.0, L2)
        assert 1.8 <= float(grow) <= 2.2
    for r in (2.0, 8.0):
        assert null_ray_bound(r / 2.0, 2.0, 4.0) / null_ray_bound(r, 2.0, 4.0) <= 2.0 ** -0.5 * (1.0 + 1e-12)


@pytest.mark.parametrize(
    "which, param",
    [("null-ray", "r"), ("null-ray", "L1"), ("anisotropic", "width"), ("anisotropic", "N"), ("null-ray-local", "L1")],
)
def test_structured_sweeps_run(which, param):
    cfg = VerifierConfig(seed=0, trials=10, smoke=True, n_max_exp=2)
    result = estimate_bilinear_constant(which, cfg)
    assert result.trials > 0
    assert f"{param}.measured" in result.slope_estimates
    assert (result.rows["ratio"] > 0).all()
    assert result.notes["sweeps"][param]["points"] >= 2


def test_input_modulation_sweep_runs():
    cfg = VerifierConfig(seed=0, trials=10, smoke=True, n_max_exp=1)
    result = estimate_bilinear_constant("input-modulation", cfg)
    assert result.trials > 0
    assert {"N.measured", "N.target"} <= set(result.slope_estimates)
    assert (result.rows["ratio"] > 0).all()


def test_sobolev_product_ratio_scales():
    grid = Grid2D(8.0 * math.pi, 32)
    f = gaussian_profile(grid, 1.0, 2.0)
    lhs, rhs = sobolev_product_ratio(grid, f, f, 0.5, 1.0)
    lhs2, rhs2 = sobolev_product_ratio(grid, 2.0 * f, f, 0.5, 1.0)
    assert lhs2 == pytest.approx(2.0 * lhs)
    assert rhs2 == pytest.approx(2.0 * rhs)


def test_borderline_ratio_grows_with_the_box():
    table = sobolev_growth(boxes=tuple(2.0 * math.pi * m for m in (2.0, 4.0, 8.0)))
    assert list(table["n"]) == [32, 64, 128]
    assert np.all(np.diff(table["ratio_1_1"]) > 0)
    inside = table["ratio_0.5_1"]
    assert inside.max() / inside.min() <= 2.0


def test_cutoff_norm_shrinks_with_T():
    stg = cutoff_lattice()
    table = cutoff_sweep(stg, free_wave(stg))
    assert list(table["T"]) == sorted(table["T"], reverse=True)
    assert np.all(np.diff(table["lhs2"]) < 0)
    assert np.all(np.isfinite(table["cutoff_lp"]))


def test_embedding_constants_are_exact():
    result = verify_embedding(VerifierConfig(seed=2, trials=40, smoke=True))
    assert result.passed
    assert result.max_ratio <= 1.0 + 1e-10
