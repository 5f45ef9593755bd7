# tests/test_sampling.py
import json
import math

import numpy as np
import pytest

from checks.sampling import (
    VerifierConfig,
    WavePacket,
    calibrate_then_assert,
    draw,
    fixed_bound_check,
    log_uniform,
    merge_results,
    rng_for,
    sample_ratios,
    unit_spinors,
)
from solver.norms import SpaceTimeGrid
from solver.spectral import Grid2D


def _uniform_sampler(rng, m):
    x = rng.uniform(0.0, 1.0, m)
    return {"lhs": x, "rhs": np.ones(m), "group": np.where(x > 0.5, "high", "low")}


def test_config_requires_enough_trials():
    with pytest.raises(ValueError):
        VerifierConfig(trials=10)
    assert VerifierConfig(trials=10, smoke=True).trials == 10
    with pytest.raises(ValueError):
        VerifierConfig(margin=0.9)
    with pytest.raises(ValueError):
        VerifierConfig(seed=-1)


def test_rng_streams_are_reproducible_and_independent():
    a = rng_for(7, 1, 0).standard_normal(4)
    b = rng_for(7, 1, 0).standard_normal(4)
    c = rng_for(7, 0, 0).standard_normal(4)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_draw_does_not_depend_on_thread_count():
    one = VerifierConfig(seed=3, trials=1000, batch=100, workers=1)
    many = VerifierConfig(seed=3, trials=1000, batch=100, workers=4)
    x = draw(_uniform_sampler, 1000, one, 1)["lhs"]
    y = draw(_uniform_sampler, 1000, many, 1)["lhs"]
    assert np.array_equal(x, y)


def test_sample_ratios_skip_tiny_rhs():
    r = sample_ratios({"lhs": np.array([1.0, 1.0, 2.0]), "rhs": np.array([2.0, 0.0, np.nan])})
    assert r[0] == 0.5
    assert np.isnan(r[1]) and np.isnan(r[2])


def test_calibrate_then_assert_passes_with_margin():
    cfg = VerifierConfig(seed=0, trials=2000, margin=1.05)
    result = calibrate_then_assert("uniform", _uniform_sampler, cfg)
    assert result.passed
    assert result.calibration <= 1.0
    assert result.threshold == pytest.approx(1.05 * result.calibration)
    assert set(result.notes["groups"]) == {"high", "low"}
    assert result.summary()["trials"] == 2000


def test_calibrate_then_assert_flags_growth():
    # el lado izquierdo crece entre la calibración y la afirmación
    calls = {"n": 0}

    def staged(rng, m):
        calls["n"] += 1
        lhs = np.ones(m)
        if calls["n"] > 1:
            lhs[0] = 100.0
        return {"lhs": lhs, "rhs": np.ones(m)}

    cfg = VerifierConfig(seed=0, trials=10, smoke=True, batch=10)
    result = calibrate_then_assert("growing", staged, cfg)
    assert not result.passed
    assert result.failing == [0]
    assert len(result.failing_rows()) == 1


def test_fixed_bound_check_and_merge():
    cfg = VerifierConfig(seed=1, trials=50, smoke=True)
    ok = fixed_bound_check("ok", _uniform_sampler, cfg, bound=1.0)
    bad = fixed_bound_check("bad", _uniform_sampler, cfg, bound=0.1)
    assert ok.passed and not bad.passed
    merged = merge_results("both", [ok, bad])
    assert merged.trials == 100
    assert not merged.passed
    assert merged.rows["sample_id"].is_unique
    assert all(i >= 50 for i in merged.failing)
    assert set(merged.notes["parts"]) == {"ok", "bad"}
    json.dumps(merged.summary())


def test_wave_packet_support_and_normalization():
    stg = SpaceTimeGrid(Grid2D(2.0 * math.pi * 4.0, 32), 4.0, 32)
    packet = WavePacket(N=2.0, L=1.0, sign=1)
    c = packet.sample(stg, np.random.default_rng(0))
    assert c is not None
    assert np.sum(np.abs(c) ** 2) == pytest.approx(1.0)
    assert not np.any(c[~packet.support_mask(stg)])


def test_wave_packet_validation():
    with pytest.raises(ValueError):
        WavePacket(N=3.0, L=1.0)
    with pytest.raises(ValueError):
        WavePacket(N=2.0, L=1.0, sign=0)
    with pytest.raises(ValueError):
        WavePacket(N=2.0, L=1.0, axis=(1.0, 1.0))


def test_empty_packet_returns_none_and_logs(telemetry_dir):
    stg = SpaceTimeGrid(Grid2D(2.0 * math.pi, 8), 1.0, 8)
    assert WavePacket(N=2.0 ** 9, L=1.0).sample(stg, np.random.default_rng(0)) is None
    lines = (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[-1])["event"] == "verifier_empty_support"


def test_random_helpers():
    rng = np.random.default_rng(0)
    z = unit_spinors(rng, 10)
    assert np.allclose(np.linalg.norm(z, axis=-1), 1.0)
    x = log_uniform(rng, 0.01, 1.0, 100)
    assert np.all((x >= 0.01) & (x <= 1.0))
