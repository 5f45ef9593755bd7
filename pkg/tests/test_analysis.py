# tests/test_analysis.py
import math

import numpy as np
import pytest

from checks.analysis import (
    ANALYSIS_CHECKS,
    CURRENT_GRID,
    DUHAMEL_TOL,
    MAGIC_BOX,
    MAGIC_N,
    duhamel_leapfrog_error,
    energy_lattice,
    energy_rhs,
    energy_solution,
    energy_source,
    magic_field,
    magic_pair,
    magic_refinement,
    verify_current_bounds,
    verify_energy_lemma,
)
from checks.sampling import VerifierConfig
from solver.norms import magic_norm, sobolev_norm
from solver.spectral import Grid2D, fourier_field


@pytest.mark.parametrize("idx", [0, 1])
def test_duhamel_agrees_with_leapfrog(idx):
    assert duhamel_leapfrog_error(3, idx) <= DUHAMEL_TOL


def test_free_solution_at_zero_is_the_data():
    stg = energy_lattice()
    rng = np.random.default_rng(0)
    f_hat = rng.standard_normal((stg.grid.n, stg.grid.n)) + 0j
    g_hat = rng.standard_normal((stg.grid.n, stg.grid.n)) + 0j
    F = energy_source(stg, "free", rng)
    assert not np.any(F)
    assert np.allclose(energy_solution(stg, f_hat, g_hat, F, 0.0), f_hat)


def test_free_solution_conserves_energy():
    stg = energy_lattice()
    g = stg.grid
    rng = np.random.default_rng(1)
    f_hat = (rng.standard_normal((g.n, g.n)) + 0j) * (g.kabs > 0)
    zero = np.zeros_like(f_hat)
    u = energy_solution(stg, f_hat, zero, zero[None].repeat(stg.nt, 0), 0.7)
    # |û(t)| = |cos(t|ξ|)| |f̂|
    assert np.allclose(np.abs(u), np.abs(np.cos(0.7 * g.kabs) * f_hat))


def test_energy_rhs_dominates_free_solution():
    stg = energy_lattice()
    g = stg.grid
    rng = np.random.default_rng(2)
    f_hat = (rng.standard_normal((g.n, g.n)) + 0j) * g.dealias_mask
    g_hat = (rng.standard_normal((g.n, g.n)) + 0j) * g.dealias_mask
    F = energy_source(stg, "free", rng)
    rhs = energy_rhs(stg, f_hat, g_hat, F, 0.0)
    for t in (-1.0, 0.0, 1.0):
        lhs = sobolev_norm(fourier_field(g, energy_solution(stg, f_hat, g_hat, F, t)), 0.0)
        assert lhs <= 2.0 * rhs


def test_energy_lemma_smoke():
    result = verify_energy_lemma(VerifierConfig(seed=0, trials=8, smoke=True))
    parts = result.notes["parts"]
    assert set(parts) == {"energy_bound", "duhamel_leapfrog"}
    assert parts["duhamel_leapfrog"]["pass"]
    assert np.isfinite(result.max_ratio)


def test_magic_pair_is_ordered():
    rng = np.random.default_rng(0)
    for _ in range(100):
        S, T = magic_pair(rng)
        assert 0.0 < S < T <= 1.0


def test_magic_norm_ratio_is_one_at_equal_times():
    grid = Grid2D(MAGIC_BOX, MAGIC_N)
    rng = np.random.default_rng(4)
    for family in ("single_shell", "white", "decay", "low"):
        f = fourier_field(grid, magic_field(grid, family, rng))
        T = 0.3
        assert magic_norm(f, T) == pytest.approx(magic_norm(f, T))
        assert not magic_field(grid, family, rng)[0, 0]


def test_magic_field_respects_the_cap():
    grid = Grid2D(MAGIC_BOX, MAGIC_N)
    c = magic_field(grid, "white", np.random.default_rng(5), k_cap=1.0)
    assert not np.any(c[grid.kabs > 1.0])


def test_magic_refinement_report():
    assert MAGIC_N == 128
    report = magic_refinement(VerifierConfig(seed=0, trials=64, smoke=True), trials=64)
    assert set(report) == {"coarse", "fine", "relative_change"}
    assert report["coarse"] > 0.0 and math.isfinite(report["fine"])
    assert report["relative_change"] >= 0.0


def test_current_bounds_smoke():
    assert CURRENT_GRID.n == 64
    result = verify_current_bounds(VerifierConfig(seed=1, trials=32, smoke=True))
    assert result.rows.shape[0] == 64
    assert set(result.notes["groups"]) == {"low_frequency", "h_minus_3_2"}
    assert np.isfinite(result.max_ratio)


def test_registry_keys():
    assert set(ANALYSIS_CHECKS) == {"energy", "magic_monotone", "current_bounds"}
