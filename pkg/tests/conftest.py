# tests/conftest.py
import math
import os
import sys

import pytest

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

from solver.spectral import Grid2D  # noqa: E402


@pytest.fixture(autouse=True)
def telemetry_dir(tmp_path, monkeypatch):
    """Los eventos JSONL de cada test van a su propio directorio temporal."""
    d = tmp_path / "telemetry"
    monkeypatch.setenv("TELEMETRY_DIR", str(d))
    monkeypatch.setenv("TELEMETRY_FILE", "events.jsonl")
    return d


@pytest.fixture
def small_grid():
    return Grid2D(2.0 * math.pi * 2.0, 16)


@pytest.fixture
def grid32():
    return Grid2D(2.0 * math.pi * 4.0, 32)
