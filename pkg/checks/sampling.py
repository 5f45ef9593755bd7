# checks/sampling.py
# -*- coding: utf-8 -*-
"""
Protocolo de muestreo del verificador.

- Semillas: cada lote tiene su propio generador Philox indexado por
  (seed, stream, lote), así que la ejecución en serie y en paralelo produce
  exactamente las mismas muestras.
- Calibrar y afirmar: el stream 0 fija C* = max lhs/rhs; el stream 1
  comprueba lhs/rhs ≤ margin·C* sobre muestras nuevas.
- WavePacket: coeficientes gaussianos sobre K^±_{N,L} (con sector, tubo,
  franja o cono opcionales) en la retícula espacio-temporal.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from solver.norms import SpaceTimeGrid, modulation_shell_index
from solver.spectral import INHOMOGENEOUS, Sector, fft_workers, sector_mask, shell_index
from utils.telemetry import log_simple

CALIBRATION_STREAM = 0
ASSERTION_STREAM = 1
MIN_TRIALS = 1000
# muestras con rhs por debajo de este valor no entran en el cociente
RHS_FLOOR = 1e-12
ABS_TOL = 1e-12

EVIDENCE_COLUMNS = ["sample_id", "lhs", "rhs", "ratio"]

# sampler(rng, m) -> {"lhs": (m,), "rhs": (m,), opcional "group": (m,)}
Sampler = Callable[[np.random.Generator, int], Dict[str, np.ndarray]]


# -----------------------------------------------------------------------------
# Configuración
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class VerifierConfig:
    seed: int = 0
    trials: int = 10_000
    calibration_trials: Optional[int] = None
    n_max_exp: int = 6
    margin: float = 1.05
    lemmas: Tuple[str, ...] = ()
    workers: Optional[int] = None
    batch: int = 2048
    smoke: bool = False

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials debe ser positivo (trials={self.trials})")
        if self.trials < MIN_TRIALS and not self.smoke:
            raise ValueError(f"se requieren al menos {MIN_TRIALS} muestras por lema (trials={self.trials})")
        if self.calibration_trials is not None and self.calibration_trials < 1:
            raise ValueError("calibration_trials debe ser positivo")
        if not self.margin >= 1.0:
            raise ValueError(f"margin debe ser ≥ 1 (margin={self.margin})")
        if not 1 <= self.n_max_exp <= 10:
            raise ValueError(f"n_max_exp fuera de [1, 10]: {self.n_max_exp}")
        if self.batch < 1:
            raise ValueError("batch debe ser positivo")
        if self.seed < 0:
            raise ValueError("seed debe ser no negativa")

    @property
    def n_calibration(self) -> int:
        return self.calibration_trials or self.trials

    def thread_count(self) -> int:
        cap = fft_workers()
        return max(1, min(self.workers or cap, cap))


def rng_for(seed: int, stream: int, idx: int) -> np.random.Generator:
    """Generador contador (Philox) del lote `idx` en el stream dado."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream, idx])))


# -----------------------------------------------------------------------------
# Extracción por lotes
# -----------------------------------------------------------------------------
def draw(sampler: Sampler, n: int, cfg: VerifierConfig, stream: int) -> Dict[str, np.ndarray]:
    """Concatena los lotes en orden; el reparto entre hilos no altera el resultado."""
    sizes = [cfg.batch] * (n // cfg.batch)
    if n % cfg.batch:
        sizes.append(n % cfg.batch)

    def one(i: int) -> Dict[str, np.ndarray]:
        return sampler(rng_for(cfg.seed, stream, i), sizes[i])

    workers = cfg.thread_count()
    if workers == 1 or len(sizes) == 1:
        parts = [one(i) for i in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(one, range(len(sizes))))
    keys = parts[0].keys()
    return {k: np.concatenate([np.asarray(p[k]) for p in parts]) for k in keys}


def sample_ratios(sample: Dict[str, np.ndarray]) -> np.ndarray:
    """lhs/rhs, NaN donde rhs < RHS_FLOOR."""
    lhs = np.asarray(sample["lhs"], dtype=float)
    rhs = np.asarray(sample["rhs"], dtype=float)
    ok = np.isfinite(rhs) & (rhs >= RHS_FLOOR) & np.isfinite(lhs)
    out = np.full(lhs.shape, np.nan)
    out[ok] = lhs[ok] / rhs[ok]
    return out


def evidence_frame(sample: Dict[str, np.ndarray], ratio: np.ndarray) -> pd.DataFrame:
    df = pd.DataFrame(
        {
            "sample_id": np.arange(ratio.size),
            "lhs": np.asarray(sample["lhs"], dtype=float),
            "rhs": np.asarray(sample["rhs"], dtype=float),
            "ratio": ratio,
        }
    )
    if "group" in sample:
        df["group"] = np.asarray(sample["group"]).astype(str)
    return df


# -----------------------------------------------------------------------------
# Resultado
# -----------------------------------------------------------------------------
@dataclass
class LemmaResult:
    lemma: str
    trials: int
    max_ratio: float
    passed: bool
    calibration: Optional[float] = None
    threshold: Optional[float] = None
    slope_estimates: Dict[str, float] = field(default_factory=dict)
    rows: pd.DataFrame = field(default_factory=lambda: pd.DataFrame(columns=EVIDENCE_COLUMNS))
    failing: List[int] = field(default_factory=list)
    skipped: int = 0
    notes: Dict[str, object] = field(default_factory=dict)

    def summary(self) -> Dict[str, object]:
        return {
            "lemma": self.lemma,
            "trials": int(self.trials),
            "max_ratio": _finite_or_none(self.max_ratio),
            "slope_estimates": {k: _finite_or_none(v) for k, v in self.slope_estimates.items()},
            "pass": bool(self.passed),
        }

    def failing_rows(self) -> pd.DataFrame:
        if not self.failing:
            return self.rows.iloc[0:0]
        return self.rows[self.rows["sample_id"].isin(self.failing)]


def _finite_or_none(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _nanmax(a: np.ndarray) -> float:
    a = a[np.isfinite(a)]
    return float(a.max()) if a.size else 0.0


def _group_notes(rows: pd.DataFrame) -> Dict[str, object]:
    if "group" not in rows.columns:
        return {}
    agg = rows.groupby("group")["ratio"].agg(["max", "count"])
    return {"groups": {str(g): {"max_ratio": _finite_or_none(r["max"]), "count": int(r["count"])} for g, r in agg.iterrows()}}


# -----------------------------------------------------------------------------
# Protocolos
# -----------------------------------------------------------------------------
def calibrate_then_assert(lemma: str, sampler: Sampler, cfg: VerifierConfig) -> LemmaResult:
    """C* en el stream de calibración; lhs/rhs ≤ margin·C* en el de afirmación."""
    cal = draw(sampler, cfg.n_calibration, cfg, CALIBRATION_STREAM)
    C = _nanmax(sample_ratios(cal))
    threshold = cfg.margin * C

    sample = draw(sampler, cfg.trials, cfg, ASSERTION_STREAM)
    ratio = sample_ratios(sample)
    rows = evidence_frame(sample, ratio)
    bad = np.nan_to_num(ratio, nan=-np.inf) > threshold + ABS_TOL
    skipped = int(np.sum(~np.isfinite(ratio)))
    if skipped:
        log_simple("verifier_skipped_samples", scope=lemma, metadata={"skipped": skipped, "floor": RHS_FLOOR})
    notes = _group_notes(rows)
    notes["calibration_trials"] = cfg.n_calibration
    return LemmaResult(
        lemma=lemma,
        trials=cfg.trials,
        max_ratio=_nanmax(ratio),
        passed=not bool(bad.any()),
        calibration=C,
        threshold=threshold,
        rows=rows,
        failing=[int(i) for i in np.flatnonzero(bad)],
        skipped=skipped,
        notes=notes,
    )


def fixed_bound_check(
    lemma: str,
    sampler: Sampler,
    cfg: VerifierConfig,
    bound: float = 1.0,
    stream: int = ASSERTION_STREAM,
) -> LemmaResult:
    """lhs/rhs ≤ bound con una constante explícita (identidades, conteos)."""
    sample = draw(sampler, cfg.trials, cfg, stream)
    ratio = sample_ratios(sample)
    rows = evidence_frame(sample, ratio)
    bad = np.nan_to_num(ratio, nan=-np.inf) > bound * (1.0 + 1e-12) + ABS_TOL
    return LemmaResult(
        lemma=lemma,
        trials=cfg.trials,
        max_ratio=_nanmax(ratio),
        passed=not bool(bad.any()),
        threshold=bound,
        rows=rows,
        failing=[int(i) for i in np.flatnonzero(bad)],
        skipped=int(np.sum(~np.isfinite(ratio))),
        notes=_group_notes(rows),
    )


def merge_results(lemma: str, parts: List[LemmaResult]) -> LemmaResult:
    """Une sub-comprobaciones de un mismo lema; cada una queda como grupo."""
    frames = []
    failing: List[int] = []
    offset = 0
    groups: Dict[str, object] = {}
    for p in parts:
        df = p.rows.copy()
        df["sample_id"] = df["sample_id"] + offset
        df["group"] = p.lemma if "group" not in df.columns else p.lemma + ":" + df["group"].astype(str)
        frames.append(df)
        failing.extend(i + offset for i in p.failing)
        offset += len(df)
        groups[p.lemma] = {
            "max_ratio": _finite_or_none(p.max_ratio),
            "calibration": _finite_or_none(p.calibration),
            "pass": bool(p.passed),
        }
    rows = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=EVIDENCE_COLUMNS)
    slopes: Dict[str, float] = {}
    for p in parts:
        slopes.update({f"{p.lemma}.{k}": v for k, v in p.slope_estimates.items()})
    return LemmaResult(
        lemma=lemma,
        trials=sum(p.trials for p in parts),
        max_ratio=max((p.max_ratio for p in parts), default=0.0),
        passed=all(p.passed for p in parts),
        slope_estimates=slopes,
        rows=rows,
        failing=failing,
        skipped=sum(p.skipped for p in parts),
        notes={"parts": groups},
    )


# -----------------------------------------------------------------------------
# Paquetes de ondas
# -----------------------------------------------------------------------------
def dyadic_exponent(value: float, name: str = "N") -> int:
    """log2 de un diádico ≥ 1."""
    if not value >= 1.0:
        raise ValueError(f"{name} debe ser ≥ 1 ({name}={value})")
    j = math.log2(value)
    if abs(j - round(j)) > 1e-9:
        raise ValueError(f"{name}={value} no es diádico")
    return int(round(j))


@dataclass(frozen=True)
class WavePacket:
    """
    Soporte K^±_{N,L}: ⟨ξ⟩ ∈ [N, 2N), ⟨τ ± |ξ|⟩ ∈ [L, 2L). Restricciones
    opcionales respecto del eje ω (`axis`):
      sector      ±ξ ∈ Γ_γ(ω')
      tube        |P_{ω⊥} ξ| ≤ r
      interval    ξ·ω ∈ [a, b)
      perp_gap    θ(ξ, ω⊥) ≥ α
    """

    N: float
    L: float
    sign: int = 1
    sector: Optional[Sector] = None
    tube: Optional[float] = None
    interval: Optional[Tuple[float, float]] = None
    perp_gap: Optional[float] = None
    axis: Tuple[float, float] = (1.0, 0.0)
    exclude_zero: bool = True

    def __post_init__(self) -> None:
        dyadic_exponent(self.N, "N")
        dyadic_exponent(self.L, "L")
        if self.sign not in (1, -1):
            raise ValueError(f"sign debe ser ±1 (sign={self.sign})")
        if self.tube is not None and not self.tube > 0:
            raise ValueError("el radio del tubo debe ser positivo")
        if abs(math.hypot(*self.axis) - 1.0) > 1e-9:
            raise ValueError(f"axis debe ser unitario: {self.axis}")

    @property
    def phase(self) -> str:
        return "+abs" if self.sign > 0 else "-abs"

    def spatial_mask(self, stg: SpaceTimeGrid) -> np.ndarray:
        g = stg.grid
        mask = (shell_index(g, INHOMOGENEOUS) == dyadic_exponent(self.N)) & ~g.nyquist_mask
        if self.exclude_zero:
            mask &= g.kabs > 0
        if self.sector is not None:
            mask &= sector_mask(g, self.sector, self.sign)
        w0, w1 = self.axis
        along = g.kx * w0 + g.ky * w1
        perp = -g.kx * w1 + g.ky * w0
        if self.tube is not None:
            mask &= np.abs(perp) <= self.tube + 1e-12
        if self.interval is not None:
            a, b = self.interval
            mask &= (along >= a - 1e-12) & (along < b - 1e-12)
        if self.perp_gap is not None:
            mask &= np.abs(along) >= g.kabs * math.sin(self.perp_gap) - 1e-12
        return mask

    def support_mask(self, stg: SpaceTimeGrid) -> np.ndarray:
        """Máscara booleana (nt, n, n) del soporte en la retícula espacio-temporal."""
        lmask = modulation_shell_index(stg, self.phase) == dyadic_exponent(self.L, "L")
        return lmask & self.spatial_mask(stg)[None]

    def sample(
        self,
        stg: SpaceTimeGrid,
        rng: np.random.Generator,
        coherent: bool = False,
    ) -> Optional[np.ndarray]:
        """
        Coeficientes espacio-temporales (nt, n, n) con norma 1; None si el
        soporte discreto es vacío. `coherent` usa amplitud constante.
        """
        mask = self.support_mask(stg)
        count = int(mask.sum())
        if count == 0:
            log_simple(
                "verifier_empty_support",
                scope="wave_packet",
                metadata={"N": self.N, "L": self.L, "sign": self.sign, "tube": self.tube},
            )
            return None
        c = np.zeros(mask.shape, dtype=complex)
        if coherent:
            c[mask] = 1.0
        else:
            c[mask] = rng.standard_normal(count) + 1j * rng.standard_normal(count)
        return c / np.sqrt(np.sum(np.abs(c) ** 2))


# -----------------------------------------------------------------------------
# Vectores aleatorios comunes
# -----------------------------------------------------------------------------
def unit_vectors(rng: np.random.Generator, m: int) -> np.ndarray:
    phi = rng.uniform(0.0, 2.0 * math.pi, m)
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def unit_spinors(rng: np.random.Generator, m: int) -> np.ndarray:
    z = rng.standard_normal((m, 2)) + 1j * rng.standard_normal((m, 2))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def log_uniform(rng: np.random.Generator, lo: float, hi: float, size) -> np.ndarray:
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size))
