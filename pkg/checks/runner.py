# checks/runner.py
# -*- coding: utf-8 -*-
"""
Registro de lemas y ejecución del verificador: un CSV de evidencia por lema,
un CSV con las muestras fallidas cuando las hay y `summary.json` con
{lemma, trials, max_ratio, slope_estimates, pass}.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

from checks.analysis import ANALYSIS_CHECKS
from checks.bilinear import BILINEAR_CHECKS
from checks.combinatorics import COMBINATORIAL_CHECKS
from checks.sampling import LemmaResult, VerifierConfig
from checks.symbols import SYMBOL_CHECKS, verify_potential_identity
from solver.errors import LemmaFailure
from solver.spectral import Grid2D
from utils.artifacts import ensure_dir, write_csv, write_json
from utils.telemetry import log_event

LemmaCheck = Callable[[VerifierConfig], LemmaResult]

POTENTIAL_GRID = Grid2D(4.0 * math.pi, 32)
# la identidad es exacta; pocas realizaciones bastan
POTENTIAL_TRIALS = 64

SUMMARY_FILE = "summary.json"
SUMMARY_CSV = "summary.csv"


def _potential_identity(cfg: VerifierConfig) -> LemmaResult:
    small = replace(cfg, trials=min(cfg.trials, POTENTIAL_TRIALS), calibration_trials=None, smoke=True)
    return verify_potential_identity(small, POTENTIAL_GRID)


LEMMA_REGISTRY: Dict[str, LemmaCheck] = {
    **SYMBOL_CHECKS,
    "potential_identity": _potential_identity,
    **COMBINATORIAL_CHECKS,
    **BILINEAR_CHECKS,
    **ANALYSIS_CHECKS,
}


def resolve_lemmas(names: Sequence[str]) -> List[str]:
    """Lista vacía → todos, en el orden del registro. Nombres desconocidos → ValueError."""
    if not names:
        return list(LEMMA_REGISTRY)
    unknown = [n for n in names if n not in LEMMA_REGISTRY]
    if unknown:
        raise ValueError(f"Lemas desconocidos: {', '.join(unknown)} (opciones: {', '.join(LEMMA_REGISTRY)})")
    seen: List[str] = []
    for n in names:
        if n not in seen:
            seen.append(n)
    return seen


def run_lemma(name: str, cfg: VerifierConfig) -> LemmaResult:
    t0 = time.time()
    try:
        result = LEMMA_REGISTRY[name](cfg)
    except Exception as e:
        log_event("lemma", "verify", "error", metrics={"lemma": name}, error=str(e))
        raise
    metrics = {**result.summary(), "seconds": round(time.time() - t0, 3), "skipped": result.skipped}
    log_event("lemma", "verify", "ok" if result.passed else "flagged", metrics=metrics)
    return result


def write_evidence(result: LemmaResult, out_dir: str) -> str:
    path = write_csv(result.rows, os.path.join(out_dir, f"{result.lemma}.csv"))
    if result.failing:
        write_csv(result.failing_rows(), os.path.join(out_dir, f"{result.lemma}_failing.csv"))
    return path


def summary_table(results: Sequence[LemmaResult]) -> pd.DataFrame:
    rows = []
    for r in results:
        rows.append(
            {
                "lemma": r.lemma,
                "trials": r.trials,
                "max_ratio": r.max_ratio,
                "calibration": r.calibration,
                "threshold": r.threshold,
                "failing": len(r.failing),
                "skipped": r.skipped,
                "pass": r.passed,
            }
        )
    return pd.DataFrame(rows, columns=["lemma", "trials", "max_ratio", "calibration", "threshold", "failing", "skipped", "pass"])


def run_verifier(cfg: VerifierConfig, out_dir: str, names: Optional[Sequence[str]] = None) -> List[LemmaResult]:
    """
    Ejecuta los lemas pedidos (o `cfg.lemmas`, o todos) y escribe la evidencia.
    Devuelve los resultados; `raise_on_failure` decide el código de salida.
    """
    selected = resolve_lemmas(list(names or cfg.lemmas))
    ensure_dir(out_dir)
    log_event("start", "verify", "ok", metrics={"lemmas": selected, "seed": cfg.seed, "trials": cfg.trials})
    results: List[LemmaResult] = []
    for name in selected:
        result = run_lemma(name, cfg)
        write_evidence(result, out_dir)
        results.append(result)

    summary = {
        "seed": cfg.seed,
        "trials": cfg.trials,
        "margin": cfg.margin,
        "lemmas": [r.summary() for r in results],
        "notes": {r.lemma: r.notes for r in results},
        "pass": all(r.passed for r in results),
    }
    write_json(summary, os.path.join(out_dir, SUMMARY_FILE))
    write_csv(summary_table(results), os.path.join(out_dir, SUMMARY_CSV))
    status = "ok" if summary["pass"] else "flagged"
    log_event("finish", "verify", status, metrics={"passed": sum(r.passed for r in results), "total": len(results)})
    return results


def raise_on_failure(results: Sequence[LemmaResult]) -> None:
    for r in results:
        if not r.passed:
            samples = r.failing_rows().head(20).to_dict(orient="records")
            raise LemmaFailure(r.lemma, f"{len(r.failing)} muestras superan el umbral {r.threshold}", samples)
