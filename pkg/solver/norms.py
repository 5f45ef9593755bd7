# solver/norms.py
# -*- coding: utf-8 -*-
"""
Normas: H^s, ‖·‖_(T), D_T / D̃_T y normas discretas X^{s,b;p} sobre
muestras espacio-temporales.

Convención espacio-temporal: ventana [t₀, t₀+2T_win) con nt muestras,
τ ∈ (π/T_win)ℤ, ũ(τ) ∼ ∫e^{−itτ}u dt. Una onda libre e^{−itφ(ξ)} vive en
τ = −φ(ξ) y el peso de modulación es ⟨τ+φ(ξ)⟩.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import integrate

from solver.initial_data import EMSplit
from solver.spectral import (
    ComplexField2D,
    Grid2D,
    as_fourier,
    backward,
    fft_workers,
    forward,
    fourier_field,
    high_sobolev_norm,
    low_shell_sum,
    shell_index,
    shell_norms,
    INHOMOGENEOUS,
)

PHASES = ("+abs", "-abs", "+bracket", "-bracket")


# -----------------------------------------------------------------------------
# Normas espaciales
# -----------------------------------------------------------------------------
def sobolev_norm(field: ComplexField2D, s: float) -> float:
    f = as_fourier(field)
    g = f.grid
    energy = np.sum(np.abs(f.samples.reshape(-1, g.n, g.n)) ** 2, axis=0)
    return float(np.sqrt(np.sum(energy * g.kbracket ** (2.0 * s))))


def _check_T(T: float) -> None:
    if not (0.0 < T <= 1.0):
        raise ValueError(f"T debe estar en (0, 1] (T={T})")


def magic_norm(field: ComplexField2D, T: float) -> float:
    """‖f‖_(T) = ‖P_{|ξ|≥1/T} f‖_{H^{−1/2}} + T^{1/2} Σ_{0<N<1/T} ‖P_{|ξ|∼N} P_{|ξ|<1/T} f‖."""
    _check_T(T)
    cutoff = 1.0 / T
    return high_sobolev_norm(field, cutoff, -0.5) + math.sqrt(T) * low_shell_sum(field, cutoff)


@dataclass
class NormReport:
    T: float
    magic_low: float
    magic_high: float
    D_T: float
    tildeD_T: float
    shells: Dict[str, Dict[float, float]] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, object]:
        return {
            "T": self.T,
            "magic_low": self.magic_low,
            "magic_high": self.magic_high,
            "D_T": self.D_T,
            "tildeD_T": self.tildeD_T,
            "shells": {k: {str(N): v for N, v in tab.items()} for k, tab in self.shells.items()},
        }

    def shell_rows(self) -> List[Dict[str, object]]:
        rows = []
        for part, tab in self.shells.items():
            for N, v in sorted(tab.items()):
                rows.append({"part": part, "N": N, "value": v})
        return rows


def data_norm_DT(split: EMSplit, T: float) -> NormReport:
    """
    D_T = ‖E^df‖_(T) + ‖B³‖_(T) con E^df = E^df₊+E^df₋, B³ = B³₊+B³₋;
    D̃_T suma las cuatro componentes por separado.
    """
    _check_T(T)
    g = split.grid
    cutoff = 1.0 / T
    parts = {
        "Edf_plus": split.Edf_plus,
        "Edf_minus": split.Edf_minus,
        "B3_plus": split.B3_plus,
        "B3_minus": split.B3_minus,
    }
    fields = {k: fourier_field(g, forward(g, v)) for k, v in parts.items()}
    Edf = fourier_field(g, fields["Edf_plus"].samples + fields["Edf_minus"].samples)
    B3 = fourier_field(g, fields["B3_plus"].samples + fields["B3_minus"].samples)

    low = math.sqrt(T) * (low_shell_sum(Edf, cutoff) + low_shell_sum(B3, cutoff))
    high = high_sobolev_norm(Edf, cutoff, -0.5) + high_sobolev_norm(B3, cutoff, -0.5)
    tilde = sum(magic_norm(f, T) for f in fields.values())
    shells = {k: shell_norms(f) for k, f in fields.items()}
    return NormReport(T=T, magic_low=low, magic_high=high, D_T=low + high, tildeD_T=tilde, shells=shells)


# -----------------------------------------------------------------------------
# Retícula espacio-temporal
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class SpaceTimeGrid:
    grid: Grid2D
    T_win: float
    nt: int
    t0: Optional[float] = None

    def __post_init__(self) -> None:
        if self.nt <= 0 or self.nt % 2:
            raise ValueError(f"nt debe ser par y positivo (nt={self.nt})")
        if not self.T_win > 0:
            raise ValueError(f"T_win debe ser positivo (T_win={self.T_win})")

    @property
    def start(self) -> float:
        return -self.T_win if self.t0 is None else self.t0

    @cached_property
    def dt(self) -> float:
        return 2.0 * self.T_win / self.nt

    @cached_property
    def times(self) -> np.ndarray:
        return self.start + self.dt * np.arange(self.nt)

    @cached_property
    def tau(self) -> np.ndarray:
        return 2.0 * math.pi * np.fft.fftfreq(self.nt, d=self.dt)

    def phase(self, phi: str) -> np.ndarray:
        if phi not in PHASES:
            raise ValueError(f"phi desconocido: {phi!r} (opciones: {PHASES})")
        base = self.grid.kabs if phi.endswith("abs") else self.grid.kbracket
        return base if phi.startswith("+") else -base

    def modulation(self, phi: str) -> np.ndarray:
        """⟨τ+φ(ξ)⟩, forma (nt, n, n)."""
        return np.sqrt(1.0 + (self.tau[:, None, None] + self.phase(phi)[None]) ** 2)


def spacetime_forward(stg: SpaceTimeGrid, u: np.ndarray) -> np.ndarray:
    """ũ(τ, ξ) de muestras u(t, x) de forma (..., nt, n, n); Parseval exacto."""
    c = forward(stg.grid, u)
    c = sfft.fft(c, axis=-3, norm="ortho", workers=fft_workers()) * math.sqrt(stg.dt)
    return c * np.exp(-1j * stg.tau * stg.start)[:, None, None]


def spacetime_backward(stg: SpaceTimeGrid, c: np.ndarray) -> np.ndarray:
    c = c * np.exp(1j * stg.tau * stg.start)[:, None, None]
    c = sfft.ifft(c / math.sqrt(stg.dt), axis=-3, norm="ortho", workers=fft_workers())
    return backward(stg.grid, c)


def modulation_shell_index(stg: SpaceTimeGrid, phi: str) -> np.ndarray:
    """Exponente j ≥ 0 de la capa ⟨τ+φ(ξ)⟩ ∈ [2^j, 2^{j+1})."""
    return np.floor(np.log2(stg.modulation(phi)) + 1e-12).astype(np.int64)


def xsb_shell_table(stg: SpaceTimeGrid, u: np.ndarray, s: float, phi: str) -> Dict[float, float]:
    """‖⟨D⟩^s P_{⟨τ+φ⟩∼L} u‖ por capa L (sin el factor L^b), orden creciente."""
    c = spacetime_forward(stg, u)
    energy = np.abs(c) ** 2
    if energy.ndim > 3:
        energy = energy.reshape(-1, *energy.shape[-3:]).sum(axis=0)
    energy = energy * (stg.grid.kbracket ** (2.0 * s))[None]
    idx = modulation_shell_index(stg, phi)
    table: Dict[float, float] = {}
    for j in range(int(idx.max()) + 1):
        table[2.0 ** j] = float(np.sqrt(np.sum(energy[idx == j])))
    return table


def xsb_norm(stg: SpaceTimeGrid, u: np.ndarray, s: float, b: float, p: float = 1, phi: str = "+abs") -> float:
    """‖u‖_{X^{s,b;p}_φ}: ℓ¹ (p=1) o ℓ^∞ (p=inf) sobre capas diádicas de modulación."""
    table = xsb_shell_table(stg, u, s, phi)
    weighted = [L ** b * v for L, v in table.items()]
    if p == 1:
        return float(sum(weighted))
    if p in (math.inf, "inf"):
        return float(max(weighted)) if weighted else 0.0
    raise ValueError(f"p debe ser 1 o inf (p={p})")


def xsb_nl_table(stg: SpaceTimeGrid, u: np.ndarray, s: float, phi: str) -> List[Dict[str, float]]:
    """Tabla por (N, L) con N capas de ⟨ξ⟩ y L capas de modulación."""
    c = spacetime_forward(stg, u)
    energy = np.abs(c) ** 2
    if energy.ndim > 3:
        energy = energy.reshape(-1, *energy.shape[-3:]).sum(axis=0)
    energy = energy * (stg.grid.kbracket ** (2.0 * s))[None]
    lidx = modulation_shell_index(stg, phi)
    nidx = np.broadcast_to(shell_index(stg.grid, INHOMOGENEOUS)[None], lidx.shape)
    rows = []
    for jn in sorted(int(j) for j in np.unique(nidx)):
        for jl in range(int(lidx.max()) + 1):
            sel = (nidx == jn) & (lidx == jl)
            if np.any(sel):
                rows.append({"N": 2.0 ** jn, "L": 2.0 ** jl, "value": float(np.sqrt(np.sum(energy[sel])))})
    return rows


def embedding_constant(stg: SpaceTimeGrid, phi: str = "+abs") -> float:
    """
    C con sup_t ‖u(t)‖_{H^s} ≤ C‖u‖_{X^{s,1/2;1}} en la ventana discreta:
    C = max_L (max_ξ #{τ : ⟨τ+φ⟩∼L} / (2T_win·L))^{1/2}.
    """
    idx = modulation_shell_index(stg, phi)
    best = 0.0
    for j in range(int(idx.max()) + 1):
        count = np.sum(idx == j, axis=0).max()
        best = max(best, math.sqrt(count / (2.0 * stg.T_win * 2.0 ** j)))
    return best


def ell1_embedding_constant(stg: SpaceTimeGrid, b: float, b_prime: float, phi: str = "+abs") -> float:
    """C_{b,b'} = Σ_L L^{b−b'} sobre las capas de modulación presentes."""
    if not b < b_prime:
        raise ValueError("se requiere b < b'")
    top = int(modulation_shell_index(stg, phi).max())
    return float(sum(2.0 ** (j * (b - b_prime)) for j in range(top + 1)))


def sup_time_sobolev(stg: SpaceTimeGrid, u: np.ndarray, s: float) -> float:
    """max_t ‖u(t)‖_{H^s} sobre las muestras de la ventana."""
    c = forward(stg.grid, u)
    energy = np.abs(c) ** 2
    if energy.ndim > 3:
        energy = np.moveaxis(energy, -3, 0).reshape(stg.nt, -1, stg.grid.n, stg.grid.n).sum(axis=1)
    per_t = np.sqrt(np.sum(energy * (stg.grid.kbracket ** (2.0 * s))[None], axis=(-2, -1)))
    return float(per_t.max())


# -----------------------------------------------------------------------------
# Corte temporal
# -----------------------------------------------------------------------------
def _smooth_step(x: np.ndarray) -> np.ndarray:
    """0 para x ≤ 0, 1 para x ≥ 1, C^∞ entre medias."""
    x = np.clip(x, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class CutoffFunction:
    """ρ_T(t) = ρ(t/T), ρ = 1 en |t| ≤ 1 y 0 en |t| ≥ 2."""

    T: float = 1.0

    def __call__(self, t: np.ndarray) -> np.ndarray:
        s = np.abs(np.asarray(t, dtype=float)) / self.T
        return _smooth_step(2.0 - s)

    def lp_norm(self, p: float) -> float:
        if p in (math.inf, "inf"):
            return 1.0
        val, _ = integrate.quad(lambda t: float(self(np.array(t))) ** p, -2.0 * self.T, 2.0 * self.T, limit=200)
        return val ** (1.0 / p)


def rho(t: np.ndarray) -> np.ndarray:
    return CutoffFunction(1.0)(t)


def cutoff_estimates_check(
    stg: SpaceTimeGrid,
    u: np.ndarray,
    T: float,
    p: float = 4.0,
    b: float = 0.25,
    s: float = 0.0,
    phi: str = "+abs",
) -> Dict[str, object]:
    """
    Cocientes de corte:
      cutoff_lp = ‖ρ_T u‖ / (T^{1/p} ‖u‖_{X^{0,1/p;1}})
      cutoff_xsb = ‖ρ_T u‖_{X^{s,b;1}} / (T^{1/2−b} ‖u‖_{X^{s,1/2;1}})
    """
    if stg.start > -2.0 * T + 1e-12 or stg.start + 2.0 * stg.T_win < 2.0 * T - 1e-12:
        raise ValueError(f"la ventana no contiene [−2T, 2T] (T={T})")
    if not 0.0 < b <= 0.5:
        raise ValueError(f"b fuera de (0, 1/2]: {b}")
    cut = CutoffFunction(T)(stg.times)
    shape = [1] * u.ndim
    shape[-3] = stg.nt
    v = u * cut.reshape(shape)

    base1 = T ** (1.0 / p) * xsb_norm(stg, u, 0.0, 1.0 / p, 1, phi)
    base2 = T ** (0.5 - b) * xsb_norm(stg, u, s, 0.5, 1, phi)
    if base1 == 0.0 or base2 == 0.0:
        return {"T": T, "skipped": True, "cutoff_lp": None, "cutoff_xsb": None}
    lhs1 = math.sqrt(float(np.sum(np.abs(v) ** 2)) * stg.dt * stg.grid.dx ** 2)
    lhs2 = xsb_norm(stg, v, s, b, 1, phi)
    return {"T": T, "skipped": False, "cutoff_lp": lhs1 / base1, "cutoff_xsb": lhs2 / base2}


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Pendiente de la regresión lineal de log y frente a log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
