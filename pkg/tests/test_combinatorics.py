# tests/test_combinatorics.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from checks.combinatorics import (
    SECTOR_GRID,
    SECTOR_OVERLAP,
    hyperplane_counts,
    inclusion_defect,
    sector_energies,
    sector_pair_sum,
    verify_hyperplane_count,
    verify_hyperplane_lemma,
    verify_sector_sum,
    verify_set_inclusion,
    verify_whitney,
    whitney_adjacent_sum,
    whitney_separated_sum,
)
from checks.sampling import VerifierConfig
from solver.spectral import omega_family

SMOKE = VerifierConfig(seed=5, trials=200, smoke=True)


@given(st.integers(0, 6), st.integers(0, 6), st.floats(0.0, 2.0 * math.pi))
@settings(max_examples=50, deadline=None)
def test_thick_hyperplanes_cover_everything_when_d_is_large(jn, jg, phi):
    # con τ = 0 y d ≥ 2N cada ω ∈ Ω(γ) cuenta
    N = 2.0 ** jn
    gamma = math.pi / 2 ** jg
    xi = 1.5 * N * np.array([[math.cos(phi), math.sin(phi)]])
    counts = hyperplane_counts(np.zeros(1), xi, np.array([2.0 * N]), gamma)
    assert counts[0] == len(omega_family(gamma))


@pytest.mark.parametrize("N,d,gamma", [(1.0, 0.01, math.pi / 4), (16.0, 1.0, math.pi / 16), (64.0, 100.0, math.pi / 2)])
def test_hyperplane_count_below_bound(N, d, gamma):
    observed, bound = verify_hyperplane_count(N, d, gamma, samples=2048, seed=1)
    assert observed <= bound


def test_hyperplane_count_rejects_non_positive_parameters():
    with pytest.raises(ValueError):
        verify_hyperplane_count(0.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        verify_hyperplane_count(1.0, -1.0, 0.5)


def test_whitney_sums():
    rng = np.random.default_rng(0)
    a1 = rng.uniform(0.0, 2.0 * math.pi, 200)
    a2 = np.mod(a1 + 0.3, 2.0 * math.pi)
    S = whitney_separated_sum(a1, a2, [2.0 ** -j for j in range(1, 10)])
    assert np.all((S >= 1.0) & (S <= 64.0))
    # θ ≤ kγ siempre cae en la suma (k+2)γ
    assert np.all(whitney_adjacent_sum(a1, np.mod(a1 + 0.1, 2.0 * math.pi), 0.125, 1) >= 1.0)


def test_inclusion_defect_on_the_cone():
    xi = np.array([[3.0, 4.0]])
    omega = np.array([[0.6, 0.8]])
    # τ = −|ξ| sobre el cono y ξ ∥ ω
    assert inclusion_defect(np.array([-5.0]), xi, omega)[0] == pytest.approx(0.0)


def test_sector_energies_bounded_overlap():
    rng = np.random.default_rng(1)
    c = rng.standard_normal((SECTOR_GRID.n, SECTOR_GRID.n)) + 0j
    c[0, 0] = 0.0
    total = float(np.sum(np.abs(c) ** 2))
    for gamma in (math.pi, math.pi / 4, math.pi / 32):
        s = float(sector_energies(SECTOR_GRID, c, gamma).sum())
        assert total * (1.0 - 1e-12) <= s <= SECTOR_OVERLAP * total * (1.0 + 1e-12)


def test_sector_pair_sum_is_symmetric():
    rng = np.random.default_rng(2)
    c1 = rng.standard_normal((SECTOR_GRID.n, SECTOR_GRID.n)) + 0j
    c2 = rng.standard_normal((SECTOR_GRID.n, SECTOR_GRID.n)) + 0j
    gamma = math.pi / 8
    assert sector_pair_sum(SECTOR_GRID, c1, c2, gamma) == pytest.approx(sector_pair_sum(SECTOR_GRID, c2, c1, gamma))


@pytest.mark.parametrize("check", [verify_hyperplane_lemma, verify_whitney, verify_sector_sum])
def test_combinatorial_checks_pass(check):
    result = check(SMOKE)
    assert result.passed, result.failing_rows().head().to_dict(orient="records")


def test_set_inclusion_check_passes():
    result = verify_set_inclusion(VerifierConfig(seed=5, trials=64, smoke=True))
    assert result.passed
    assert set(result.notes["parts"]) == {"set_inclusion_continuous", "set_inclusion_lattice"}
