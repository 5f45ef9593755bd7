# tests/test_evolution.py
import json
import math
from dataclasses import replace

import numpy as np
import pytest

from solver.continuation import solve_T
from solver.errors import BlowUpError
from solver.evolution import (
    DiracState,
    coupling_potential,
    dirac_kinetic,
    dirac_rhs,
    em_norm_report,
    em_split_rhs,
    free_propagate,
    initial_state,
    picard_iterate,
    potential_rhs,
    solve_interval,
    step,
)
from solver.initial_data import make_data, reconstruct_em, zero_data
from solver.spectral import Grid2D, forward

SMALL = {
    "psi": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0, "polarization": [1.0, 0.0]},
    "E": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0, "polarization": [0.0, 1.0]},
    "B": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0},
}


@pytest.fixture
def grid():
    return Grid2D(8.0 * math.pi, 32)


def test_zero_data_stays_zero(grid):
    state = initial_state(zero_data(grid))
    out = step(step(state, 1.0 / 32.0), 1.0 / 32.0)
    assert np.all(out.dirac.psi == 0.0)
    assert np.all(out.potential.A == 0.0)
    assert out.diagnostics["charge"] == 0.0
    assert out.time == pytest.approx(1.0 / 16.0)


def test_free_dirac_kinetic_is_unitary(grid):
    rng = np.random.default_rng(0)
    c = rng.standard_normal((2, grid.n, grid.n)) + 1j * rng.standard_normal((2, grid.n, grid.n))
    out = dirac_kinetic(grid, c, 0.37, 1.0)
    assert np.sum(np.abs(out) ** 2) == pytest.approx(np.sum(np.abs(c) ** 2), rel=1e-12)
    back = dirac_kinetic(grid, out, -0.37, 1.0)
    assert np.allclose(back, c, atol=1e-12)


def test_free_propagate_inverts_with_opposite_time(grid):
    u = np.random.default_rng(1).standard_normal((grid.n, grid.n))
    there = free_propagate(grid, u, 0.5, "kg+")
    assert np.allclose(free_propagate(grid, there, -0.5, "kg+").real, u, atol=1e-12)
    with pytest.raises(ValueError):
        free_propagate(grid, u, 0.5, "schrodinger")


def test_charge_is_conserved_for_small_data(grid):
    state = initial_state(make_data(grid, SMALL, seed=0))
    traj = solve_interval(state, 0.25, 1.0 / 64.0, record_every=4)
    charge = traj.series("charge")
    assert len(traj.rows) == 5
    assert np.max(np.abs(charge - charge[0])) <= 1e-6 * charge[0]
    assert traj.final.time == pytest.approx(0.25)


def test_projection_parts_stay_separated(grid):
    state = initial_state(make_data(grid, SMALL, seed=1))
    out = step(state, 1.0 / 64.0)
    assert out.dirac.projection_drift() < 1e-10
    split = DiracState.from_psi(grid, out.dirac.psi)
    assert np.allclose(split.psi, out.dirac.psi, atol=1e-14)


def test_non_finite_state_raises_blowup(grid):
    state = initial_state(make_data(grid, SMALL, seed=2))
    bad_psi = state.dirac.psi_plus.copy()
    bad_psi[0, 0, 0] = np.nan
    broken = replace(state, dirac=replace(state.dirac, psi_plus=bad_psi))
    with pytest.raises(BlowUpError) as info:
        step(broken, 1.0 / 64.0)
    assert info.value.t == pytest.approx(0.0)


def test_solve_interval_rejects_non_positive_time(grid):
    state = initial_state(zero_data(grid))
    with pytest.raises(ValueError):
        solve_interval(state, 0.0, 1.0 / 64.0)


def test_diagnostics_include_data_norms(grid):
    state = initial_state(make_data(grid, SMALL, seed=3))
    traj = solve_interval(state, 1.0 / 32.0, 1.0 / 64.0, T_norm=0.25)
    row = traj.rows[-1]
    for key in ("t", "charge", "gauss_residual", "lorenz_residual", "energy", "D_T", "tildeD_T"):
        assert key in row
    assert row["tildeD_T"] >= row["D_T"] * (1.0 - 1e-12)


def test_em_split_rhs_components(grid):
    state = initial_state(make_data(grid, SMALL, seed=4))
    rhs = em_split_rhs(state)
    assert set(rhs) == {"Edf_plus", "Edf_minus", "B3_plus", "B3_minus"}
    assert np.allclose(rhs["B3_plus"], -rhs["B3_minus"])


def test_em_split_rhs_without_spinor(grid):
    spec = {**SMALL, "psi": {"profile": "zero"}}
    state = initial_state(make_data(grid, spec, seed=4))
    rhs = em_split_rhs(state)
    assert np.allclose(rhs["B3_plus"], 0.0)
    assert np.allclose(rhs["Edf_plus"], -rhs["Edf_minus"])
    # sin corriente la fuente es −E^df
    Edf = reconstruct_em(state.potential)["Edf"]
    assert np.allclose(2.0 * grid.kbracket * forward(grid, rhs["Edf_plus"]), forward(grid, Edf))


def test_picard_on_zero_data_converges_immediately():
    grid = Grid2D(4.0 * math.pi, 16)
    report = picard_iterate(zero_data(grid), 0.125, 1.0 / 32.0, n_max=3)
    assert report.converged
    assert report.n_star == 0
    assert report.p == [0.0]


def test_picard_contracts_for_small_data():
    grid = Grid2D(4.0 * math.pi, 16)
    data = make_data(grid, SMALL, seed=5)
    report = picard_iterate(data, 0.125, 1.0 / 32.0, n_max=4, tol=1e-14)
    assert not report.non_contraction
    assert len(report.q) >= 3
    assert all(r < 1.0 for r in report.ratios[1:])
    assert np.all(np.isfinite(forward(grid, report.final_psi)))


def test_dirac_rhs_components_sum_to_the_potential_term(grid):
    state = initial_state(make_data(grid, SMALL, seed=6), mass=0.5)
    r_plus, r_minus = dirac_rhs(state)
    psi = state.dirac.psi
    total = -0.5 * np.stack([psi[0], -psi[1]]) + coupling_potential(state.potential.A, psi)
    assert np.allclose(forward(grid, r_plus + r_minus), forward(grid, total) * grid.dealias_mask)


def test_potential_rhs_without_spinor_is_the_laplacian(grid):
    assert np.all(potential_rhs(initial_state(zero_data(grid))) == 0.0)
    spec = {**SMALL, "psi": {"profile": "zero"}}
    state = initial_state(make_data(grid, spec, seed=7))
    rhs = potential_rhs(state)
    lap = -(grid.kabs ** 2) * forward(grid, state.potential.A)
    assert np.allclose(forward(grid, rhs), lap)


REFERENCE = {
    "psi": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0, "polarization": [1.0, 0.0]},
    "E": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0, "polarization": [1.0, 0.0]},
    "B": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0},
}


@pytest.fixture(scope="module")
def reference_state():
    grid = Grid2D(16.0 * math.pi, 128)
    return initial_state(make_data(grid, REFERENCE, seed=0), mass=1.0)


def _charge_drift(state, dt):
    traj = solve_interval(state, 0.5, dt, record_every=16)
    charge = traj.series("charge")
    return float(np.max(np.abs(charge - charge[0])) / charge[0])


def test_reference_charge_matches_spinor_norm(reference_state):
    g = reference_state.grid
    psi = reference_state.dirac.psi
    assert reference_state.diagnostics["charge"] == pytest.approx(np.sum(np.abs(psi) ** 2) * g.dx ** 2, rel=1e-13)


def test_reference_charge_drift_under_step_halving(reference_state):
    coarse = _charge_drift(reference_state, 1.0 / 256.0)
    fine = _charge_drift(reference_state, 1.0 / 512.0)
    assert coarse <= 1e-6
    assert fine <= 1e-6
    # el integrador conserva la carga hasta el redondeo; si no, el error debe ser de orden 2
    assert fine <= 1e-12 or coarse >= 3.5 * fine


def test_constraints_hold_along_the_reference_run(reference_state):
    traj = solve_interval(reference_state, 0.125, 1.0 / 256.0, record_every=8)
    assert traj.rows[0]["lorenz_residual"] <= 1e-12
    assert np.max(traj.series("gauss_residual")) <= 1e-5
    assert np.max(traj.series("lorenz_residual")) <= 1e-5


def test_regular_step_logs_no_drift(grid, telemetry_dir):
    state = initial_state(make_data(grid, SMALL, seed=8))
    step(step(state, 1.0 / 64.0), 1.0 / 64.0)
    log = telemetry_dir / "events.jsonl"
    events = [json.loads(line).get("event") for line in log.read_text(encoding="utf-8").splitlines()] if log.exists() else []
    assert "step_drift" not in events


def test_charge_loss_in_a_step_is_logged(grid, telemetry_dir, monkeypatch):
    import solver.evolution as evolution

    real_advance = evolution._advance

    def leaky(*args, **kwargs):
        psi_hat, *rest = real_advance(*args, **kwargs)
        return (0.99 * psi_hat, *rest)

    monkeypatch.setattr(evolution, "_advance", leaky)
    step(initial_state(make_data(grid, SMALL, seed=8)), 1.0 / 64.0)
    events = [json.loads(line) for line in (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()]
    drift = [e for e in events if e.get("event") == "step_drift"]
    assert drift
    assert drift[0]["metadata"]["charge"] == pytest.approx(1.0 - 0.99 ** 2, rel=1e-9)


def test_picard_iterates_converge_to_the_integrator():
    grid = Grid2D(4.0 * math.pi, 16)
    data = make_data(grid, SMALL, seed=5)
    state = initial_state(data)
    T = solve_T(0.1, lambda t: em_norm_report(state, t).tildeD_T)
    dt = T / 4.0
    report = picard_iterate(data, T, dt, n_max=8, tol=1e-13)
    assert not report.non_contraction
    for n in (1, 2, 3):
        if n < len(report.q) - 1 and report.q[n] > 1e-10 * report.q[0]:
            assert report.q[n + 1] <= 0.5 * report.q[n]
    final = solve_interval(state, T, dt).final.dirac.psi
    err = np.sqrt(np.sum(np.abs(report.final_psi - final) ** 2)) * grid.dx
    assert err <= 1e-5
