# tests/test_runner.py
import json

import numpy as np
import pandas as pd
import pytest

import checks.runner as runner
from checks.runner import LEMMA_REGISTRY, raise_on_failure, resolve_lemmas, run_verifier
from checks.sampling import VerifierConfig, fixed_bound_check
from solver.errors import LemmaFailure

SMOKE = VerifierConfig(seed=0, trials=64, smoke=True)


def _always_fails(cfg):
    def sampler(rng, m):
        return {"lhs": rng.uniform(0.5, 1.0, m), "rhs": np.ones(m)}

    return fixed_bound_check("always_fails", sampler, cfg, bound=0.1)


def test_resolve_lemmas():
    assert resolve_lemmas([]) == list(LEMMA_REGISTRY)
    assert resolve_lemmas(["angles", "angles", "energy"]) == ["angles", "energy"]
    with pytest.raises(ValueError, match="no_such_lemma"):
        resolve_lemmas(["angles", "no_such_lemma"])


def test_registry_covers_every_family():
    for name in ("projection_algebra", "potential_identity", "hyperplane_count", "bilinear", "energy", "magic_monotone"):
        assert name in LEMMA_REGISTRY


def test_run_verifier_writes_evidence(tmp_path, telemetry_dir):
    out = tmp_path / "verify"
    results = run_verifier(SMOKE, str(out), ["projection_algebra", "hyperplane_count"])
    assert [r.lemma for r in results] == ["projection_algebra", "hyperplane_count"]
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["pass"] is True
    assert {e["lemma"] for e in summary["lemmas"]} == {"projection_algebra", "hyperplane_count"}
    assert set(summary["lemmas"][0]) == {"lemma", "trials", "max_ratio", "slope_estimates", "pass"}
    rows = pd.read_csv(out / "projection_algebra.csv")
    assert len(rows) == SMOKE.trials
    table = pd.read_csv(out / "summary.csv")
    assert table["pass"].all()

    events = [json.loads(l) for l in (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()]
    kinds = [e.get("type") for e in events if "type" in e]
    assert kinds[0] == "start" and kinds[-1] == "finish"
    assert kinds.count("lemma") == 2


def test_forced_failure_is_reported(tmp_path, monkeypatch):
    monkeypatch.setitem(runner.LEMMA_REGISTRY, "always_fails", _always_fails)
    out = tmp_path / "verify"
    results = run_verifier(SMOKE, str(out), ["always_fails"])
    assert not results[0].passed
    assert (out / "always_fails_failing.csv").exists()
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assert summary["pass"] is False
    with pytest.raises(LemmaFailure) as info:
        raise_on_failure(results)
    assert info.value.lemma == "always_fails"
    assert len(info.value.samples) == 20


def test_potential_identity_uses_a_small_budget():
    result = LEMMA_REGISTRY["potential_identity"](VerifierConfig(seed=0, trials=1000))
    assert result.trials == runner.POTENTIAL_TRIALS
    assert result.passed
