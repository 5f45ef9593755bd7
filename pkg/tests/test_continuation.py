# tests/test_continuation.py
import json
import math

import pytest

from solver.continuation import (
    ScheduleSettings,
    first_iteration,
    global_schedule,
    growth_certificate,
    growth_sweep,
    magic_calibration,
    solve_T,
    sweep_stability,
    time_equation,
)
from solver.errors import NoAdmissibleTError
from solver.evolution import initial_state
from solver.initial_data import make_data
from solver.spectral import Grid2D

SMALL = {
    "psi": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0},
    "E": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0},
    "B": {"profile": "gaussian", "amplitude": 0.05, "width": 2.0},
}


def test_solve_T_hits_the_root():
    eps = 0.1
    T = solve_T(eps, lambda T: 0.5)
    # √T·1.5 = ε/2
    assert T == pytest.approx((eps / 3.0) ** 2, rel=1e-5)
    assert abs(time_equation(eps, lambda T: 0.5, T)) <= 1e-6 * eps


def test_solve_T_returns_one_when_admissible():
    assert solve_T(10.0, lambda T: 0.0) == 1.0


def test_solve_T_rejects_bad_inputs():
    with pytest.raises(ValueError):
        solve_T(0.0, lambda T: 0.0)
    with pytest.raises(NoAdmissibleTError):
        solve_T(1e-3, lambda T: 1e30)


def test_solve_T_is_monotone_in_epsilon():
    fn = lambda T: 0.2 + T
    Ts = [solve_T(eps, fn) for eps in (0.05, 0.1, 0.2, 0.4)]
    assert Ts == sorted(Ts)


def test_growth_certificate():
    T = 0.25
    cert = growth_certificate([1.0, 1.2, 1.1], T)
    assert cert.C_fit == pytest.approx(0.2 / (math.sqrt(T) * math.log(1.0 / T)))
    assert cert.bound_ok
    assert growth_certificate([1.0, 0.9], T).C_fit == 0.0
    with pytest.raises(ValueError):
        growth_certificate([1.0], 1.0)
    with pytest.raises(ValueError):
        growth_certificate([], 0.5)


def test_sweep_stability():
    certs = [growth_certificate([1.0, 1.0 + d], 0.25) for d in (0.1, 0.2, 0.0)]
    assert sweep_stability(certs) == pytest.approx(2.0)
    assert sweep_stability(certs[:1]) == 1.0


@pytest.fixture(scope="module")
def small_state():
    grid = Grid2D(8.0 * math.pi, 16)
    return initial_state(make_data(grid, SMALL, seed=0))


def test_first_iteration_respects_doubling(small_state):
    settings = ScheduleSettings(dt=1.0 / 32.0, record_every=4, max_windows=3)
    stage = first_iteration(small_state, 0.4, settings, t_limit=0.5)
    assert 0.0 < stage.T <= 0.5
    assert 1 <= stage.n <= 3
    assert stage.Delta == pytest.approx(stage.n * stage.T)
    assert stage.doubling_ok
    assert stage.tripling_ok
    assert stage.residual <= 1e-5


def test_global_schedule_reaches_horizon(small_state):
    settings = ScheduleSettings(dt=1.0 / 32.0, record_every=4, max_windows=8, max_stages=4)
    sched = global_schedule(small_state, 0.4, 0.5, settings)
    assert sched.j >= 1
    assert sched.S[0] == 0.0
    assert sched.S == sorted(sched.S)
    rows = sched.rows()
    assert len(rows) == sched.j
    assert {"j", "S_j", "T_j", "n_j", "Delta_j", "tripling_ok", "bridging_ok", "stop_rule_hit"} <= set(rows[0])
    assert rows[0]["bridging_ok"] is None


def test_global_schedule_rejects_bad_horizon(small_state):
    with pytest.raises(ValueError):
        global_schedule(small_state, 0.1, math.inf, ScheduleSettings())


def test_growth_sweep_one_certificate_per_T(small_state):
    Ts = (0.25, 0.125)
    certs = growth_sweep(small_state, Ts, 1.0 / 32.0, record_every=2)
    assert [c.T for c in certs] == list(Ts)
    assert all(c.C_fit >= 0.0 and c.bound_ok for c in certs)
    assert sweep_stability(certs) >= 1.0


def test_four_stage_schedule(small_state):
    eps = 0.4
    settings = ScheduleSettings(dt=1.0 / 32.0, record_every=1, max_windows=2, max_stages=4)
    sched = global_schedule(small_state, eps, 1.0, settings)
    assert sched.j == 4
    for stage in sched.stages:
        assert not stage.T_capped
        # residual = |g(T)|/ε
        assert stage.residual <= 1e-6
        assert stage.tripling_ok
        assert stage.magic_C >= 1.0
    assert sched.stages[0].bridging_ok is None
    assert all(stage.bridging_ok for stage in sched.stages[1:])
    assert sched.trend_ok
    assert sched.trend_min > 0.0


def test_bridge_constant_is_measured_on_stage_data(small_state):
    C = magic_calibration(small_state)
    assert C >= 1.0
    assert math.isfinite(C)
    # una constante fijada en la configuración sustituye a la medida
    settings = ScheduleSettings(dt=1.0 / 32.0, record_every=1, max_windows=1, max_stages=2, magic_constant=7.0)
    sched = global_schedule(small_state, 0.4, 1.0, settings)
    assert [st.magic_C for st in sched.stages] == [7.0, 7.0]


def test_capped_stage_time_is_flagged(small_state, telemetry_dir):
    settings = ScheduleSettings(dt=1.0 / 32.0, record_every=4, max_windows=1)
    stage = first_iteration(small_state, 3.0, settings, t_limit=0.5)
    assert stage.T == 0.5
    assert stage.T_capped
    assert stage.residual > 0.0
    events = [json.loads(l) for l in (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()]
    assert any(e.get("metrics", {}).get("reason") == "T_capped" for e in events)

    uncapped = first_iteration(small_state, 0.4, settings, t_limit=0.5)
    assert not uncapped.T_capped
