# tests/test_telemetry.py
import json

from utils.telemetry import log_event, log_simple


def test_events_are_appended(telemetry_dir):
    log_event("start", "simulate", "ok", t=0.0, metrics={"n": 32})
    log_simple("projection_drift", scope="dirac", metadata={"drift": 1e-9})
    lines = (telemetry_dir / "events.jsonl").read_text(encoding="utf-8").splitlines()
    first, second = (json.loads(l) for l in lines)
    assert first["type"] == "start" and first["command"] == "simulate"
    assert first["metrics"] == {"n": 32}
    assert first["ts"].endswith("Z")
    assert second == {**second, "event": "projection_drift", "scope": "dirac"}


def test_disabled_by_environment(telemetry_dir, monkeypatch):
    monkeypatch.setenv("ENABLE_TELEMETRY", "0")
    log_event("start", "verify", "ok")
    log_simple("anything")
    assert not (telemetry_dir / "events.jsonl").exists()
