# tests/test_symbols.py
import math

import numpy as np
import pytest

from checks.sampling import VerifierConfig
from checks.symbols import (
    SYMBOL_CHECKS,
    IDENTITY_TOL,
    potential_identity_error,
    verify_null_symbols,
    verify_potential_identity,
    verify_projection_algebra,
    verify_sign_gap,
)
from solver.spectral import Grid2D

SMOKE = VerifierConfig(seed=11, trials=256, smoke=True)


def test_projection_algebra_passes():
    result = verify_projection_algebra(SMOKE)
    assert result.passed
    assert result.trials == 256
    assert result.max_ratio <= 1.0


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_potential_identity_is_exact(seed):
    grid = Grid2D(4.0 * math.pi, 32)
    err, scale = potential_identity_error(grid, seed)
    assert scale > 0.0
    assert err <= IDENTITY_TOL * max(1.0, scale)


def test_potential_identity_check():
    grid = Grid2D(4.0 * math.pi, 16)
    result = verify_potential_identity(VerifierConfig(seed=0, trials=4, smoke=True), grid)
    assert result.passed
    assert len(result.rows) == 4


def test_null_symbols_merge_all_parts():
    result = verify_null_symbols(SMOKE)
    parts = result.notes["parts"]
    assert len(parts) == 4
    assert all(p["calibration"] is None or p["calibration"] >= 0.0 for p in parts.values())
    assert np.isfinite(result.max_ratio)
    assert set(result.rows["group"].str.split(":").str[0]) == set(parts)


def test_sign_gap_records_calibration():
    result = verify_sign_gap(SMOKE)
    assert result.rows.shape[0] == SMOKE.trials
    assert np.isfinite(result.max_ratio)


def test_registry_is_complete():
    assert set(SYMBOL_CHECKS) == {
        "projection_algebra",
        "null_symbols",
        "angles",
        "sign_gap",
        "angle_comparability",
        "same_sign_angles",
        "output_angle",
    }


def test_verification_is_deterministic():
    a = verify_projection_algebra(SMOKE)
    b = verify_projection_algebra(SMOKE)
    assert a.rows.equals(b.rows)
