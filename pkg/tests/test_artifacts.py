# tests/test_artifacts.py
import json

import numpy as np
import pandas as pd
import pytest

from solver.spectral import FOURIER, fourier_field, physical_field
from utils.artifacts import ArtifactError, long_format, read_csv, read_field, write_field, write_json


def test_field_dump_round_trip(tmp_path, small_grid):
    rng = np.random.default_rng(0)
    psi = rng.standard_normal((2, small_grid.n, small_grid.n)) + 1j * rng.standard_normal((2, small_grid.n, small_grid.n))
    path = write_field(str(tmp_path / "psi.bin"), physical_field(small_grid, psi))
    back = read_field(path)
    assert back.grid.n == small_grid.n
    assert back.grid.box_period == small_grid.box_period
    # complex64 en disco
    assert np.allclose(back.samples, psi, atol=1e-6)

    coeffs = fourier_field(small_grid, psi[0])
    assert read_field(write_field(str(tmp_path / "c.bin"), coeffs)).representation == FOURIER


def test_corrupt_dumps_are_rejected(tmp_path, small_grid):
    path = tmp_path / "psi.bin"
    write_field(str(path), physical_field(small_grid, np.zeros((small_grid.n, small_grid.n), complex)))
    raw = path.read_bytes()

    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ArtifactError, match="MD2D"):
        read_field(str(bad))
    bad.write_bytes(raw[:10])
    with pytest.raises(ArtifactError):
        read_field(str(bad))
    bad.write_bytes(raw[:-8])
    with pytest.raises(ArtifactError):
        read_field(str(bad))


def test_long_format():
    df = pd.DataFrame({"t": [0.0, 0.5], "charge": [1.0, 1.0], "D": [0.1, 0.2], "label": ["a", "b"]})
    out = long_format(df)
    assert list(out.columns) == ["quantity", "t", "value"]
    assert set(out["quantity"]) == {"charge", "D"}
    assert len(out) == 4
    with pytest.raises(ArtifactError):
        long_format(df.drop(columns="t"))


def test_json_replaces_non_finite(tmp_path):
    path = write_json({"a": float("nan"), "b": np.float64(2.0), "c": (1, np.inf)}, str(tmp_path / "x.json"))
    data = json.loads(open(path, encoding="utf-8").read())
    assert data == {"a": None, "b": 2.0, "c": [1, None]}


def test_missing_csv(tmp_path):
    with pytest.raises(ArtifactError):
        read_csv(str(tmp_path / "nope.csv"))
