# solver/spectral.py
# -*- coding: utf-8 -*-
"""
Infraestructura de Fourier en el toro periódico [0, L)².

- Grid2D: retícula espacial y su retícula dual de frecuencias.
- ComplexField2D: muestras (escalares, vectoriales o espinores) con etiqueta
  de representación (física | Fourier).
- Transformadas unitarias (Parseval exacto), multiplicadores h(D), capas de
  Littlewood–Paley, sectores angulares, proyección P_df y Δ⁻¹.

Normalización: c(ξ) = DFT_ortho(f)·Δx, de modo que Σ|c|² = ‖f‖²_{L²}.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from functools import cached_property, lru_cache
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy import fft as sfft

from solver.errors import (
    ConstraintViolation,
    SpectralUsageError,
    ZeroModePolicyError,
)

PHYSICAL = "physical"
FOURIER = "fourier"
HOMOGENEOUS = "homogeneous"
INHOMOGENEOUS = "inhomogeneous"

# índice de capa reservado para ξ = 0 en modo homogéneo
ZERO_SHELL = -(2 ** 30)

Symbol = Union[np.ndarray, Callable[[np.ndarray, np.ndarray], np.ndarray]]


# ---- Configuración ----------------------------------------------------------
def fft_workers() -> int:
    """Número de hilos para scipy.fft (tope: MD2D_THREADS)."""
    raw = os.getenv("MD2D_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


# -----------------------------------------------------------------------------
# Retícula
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Grid2D:
    box_period: float
    n: int
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self) -> None:
        if not isinstance(self.n, (int, np.integer)) or self.n <= 0 or self.n % 2:
            raise SpectralUsageError(f"n debe ser un entero par positivo (n={self.n})")
        if not (self.box_period > 0 and math.isfinite(self.box_period)):
            raise SpectralUsageError(f"box_period inválido: {self.box_period}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise SpectralUsageError(f"dealias_fraction fuera de (0,1]: {self.dealias_fraction}")

    @cached_property
    def dx(self) -> float:
        return self.box_period / self.n

    @cached_property
    def k_min(self) -> float:
        """Menor |ξ| no nulo de la retícula."""
        return 2.0 * math.pi / self.box_period

    @cached_property
    def mode_index(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n)

    @cached_property
    def _k_mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        k1 = self.k_min * self.mode_index
        return tuple(np.meshgrid(k1, k1, indexing="ij"))  # type: ignore[return-value]

    @property
    def kx(self) -> np.ndarray:
        return self._k_mesh[0]

    @property
    def ky(self) -> np.ndarray:
        return self._k_mesh[1]

    @cached_property
    def kabs(self) -> np.ndarray:
        return np.hypot(self.kx, self.ky)

    @cached_property
    def kbracket(self) -> np.ndarray:
        return np.sqrt(1.0 + self.kabs ** 2)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        m = self.mode_index
        mx, my = np.meshgrid(m, m, indexing="ij")
        return (mx == -self.n // 2) | (my == -self.n // 2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """Regla de 2/3 (o la fracción configurada); la fila/columna de Nyquist siempre fuera."""
        m = self.mode_index
        mx, my = np.meshgrid(m, m, indexing="ij")
        cut = self.dealias_fraction * self.n / 2.0
        keep = (np.abs(mx) <= cut + 1e-12) & (np.abs(my) <= cut + 1e-12)
        return keep & ~self.nyquist_mask

    @cached_property
    def zero_mode(self) -> np.ndarray:
        z = np.zeros((self.n, self.n), dtype=bool)
        z[0, 0] = True
        return z

    @cached_property
    def kxd(self) -> np.ndarray:
        """Símbolo de derivada: se anula en la fila/columna de Nyquist."""
        return np.where(self.nyquist_mask, 0.0, self.kx)

    @cached_property
    def kyd(self) -> np.ndarray:
        return np.where(self.nyquist_mask, 0.0, self.ky)

    @cached_property
    def coords(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(x, x, indexing="ij"))  # type: ignore[return-value]


# -----------------------------------------------------------------------------
# Campos
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ComplexField2D:
    grid: Grid2D
    samples: np.ndarray
    representation: str = PHYSICAL

    def __post_init__(self) -> None:
        if self.representation not in (PHYSICAL, FOURIER):
            raise SpectralUsageError(f"representación desconocida: {self.representation!r}")
        shape = np.shape(self.samples)
        if len(shape) < 2 or shape[-2:] != (self.grid.n, self.grid.n):
            raise SpectralUsageError(
                f"muestras de forma {shape} incompatibles con n={self.grid.n}"
            )

    @property
    def n_components(self) -> int:
        return int(np.prod(np.shape(self.samples)[:-2], dtype=int))

    def with_samples(self, samples: np.ndarray, representation: Optional[str] = None) -> "ComplexField2D":
        return replace(self, samples=samples, representation=representation or self.representation)


def forward(grid: Grid2D, samples: np.ndarray) -> np.ndarray:
    """Coeficientes de Fourier de muestras físicas (últimos dos ejes)."""
    return sfft.fft2(samples, axes=(-2, -1), norm="ortho", workers=fft_workers()) * grid.dx


def backward(grid: Grid2D, coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifft2(coeffs / grid.dx, axes=(-2, -1), norm="ortho", workers=fft_workers())


def to_fourier(field: ComplexField2D) -> ComplexField2D:
    if field.representation != PHYSICAL:
        raise SpectralUsageError("to_fourier espera un campo en representación física")
    return field.with_samples(forward(field.grid, field.samples), FOURIER)


def to_physical(field: ComplexField2D) -> ComplexField2D:
    if field.representation != FOURIER:
        raise SpectralUsageError("to_physical espera un campo en representación de Fourier")
    return field.with_samples(backward(field.grid, field.samples), PHYSICAL)


def as_fourier(field: ComplexField2D) -> ComplexField2D:
    return field if field.representation == FOURIER else to_fourier(field)


def as_physical(field: ComplexField2D) -> ComplexField2D:
    return field if field.representation == PHYSICAL else to_physical(field)


def fourier_field(grid: Grid2D, coeffs: np.ndarray) -> ComplexField2D:
    return ComplexField2D(grid, coeffs, FOURIER)


def physical_field(grid: Grid2D, samples: np.ndarray) -> ComplexField2D:
    return ComplexField2D(grid, np.asarray(samples, dtype=complex), PHYSICAL)


def l2_norm(field: ComplexField2D) -> float:
    """‖f‖_{L²} sumando todas las componentes (vía Parseval)."""
    c = as_fourier(field).samples
    return float(np.sqrt(np.sum(np.abs(c) ** 2)))


# -----------------------------------------------------------------------------
# Multiplicadores
# -----------------------------------------------------------------------------
def evaluate_symbol(grid: Grid2D, h: Symbol) -> np.ndarray:
    if callable(h):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return np.asarray(h(grid.kx, grid.ky))
    return np.asarray(h)


def bracket_power(s: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Símbolo ⟨ξ⟩^s."""
    return lambda kx, ky: (1.0 + kx ** 2 + ky ** 2) ** (s / 2.0)


def abs_power(s: float) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    """Símbolo |ξ|^s (singular en ξ=0 si s<0)."""
    return lambda kx, ky: np.hypot(kx, ky) ** s


def apply_multiplier(
    h: Symbol,
    field: ComplexField2D,
    zero_mode_policy: Optional[str] = None,
) -> ComplexField2D:
    """
    h(D) aplicado coeficiente a coeficiente. Si el símbolo no es finito en un
    modo con soporte, hace falta una política: "annihilate" (anula) o "pass"
    (deja el coeficiente como está).
    """
    f = as_fourier(field)
    grid = f.grid
    sym = np.broadcast_to(evaluate_symbol(grid, h), (grid.n, grid.n)).astype(complex)
    bad = ~np.isfinite(sym)
    if np.any(bad):
        support = np.any(np.abs(f.samples.reshape(-1, grid.n, grid.n)) > 0.0, axis=0)
        if zero_mode_policy is None:
            if np.any(bad & support):
                raise ZeroModePolicyError(
                    "el multiplicador es singular en un modo del soporte; indique zero_mode_policy"
                )
            sym = np.where(bad, 0.0, sym)
        elif zero_mode_policy == "annihilate":
            sym = np.where(bad, 0.0, sym)
        elif zero_mode_policy == "pass":
            sym = np.where(bad, 1.0, sym)
        else:
            raise SpectralUsageError(f"política de modo cero desconocida: {zero_mode_policy!r}")
    return f.with_samples(f.samples * sym, FOURIER)


# -----------------------------------------------------------------------------
# Littlewood–Paley
# -----------------------------------------------------------------------------
@lru_cache(maxsize=64)
def shell_index(grid: Grid2D, mode: str = HOMOGENEOUS) -> np.ndarray:
    """Exponente j de la capa [2^j, 2^{j+1}) de cada modo."""
    if mode == HOMOGENEOUS:
        w = grid.kabs
    elif mode == INHOMOGENEOUS:
        w = grid.kbracket
    else:
        raise SpectralUsageError(f"modo de capa desconocido: {mode!r}")
    idx = np.full(w.shape, ZERO_SHELL, dtype=np.int64)
    pos = w > 0
    idx[pos] = np.floor(np.log2(w[pos]) + 1e-12).astype(np.int64)
    idx.setflags(write=False)
    return idx


def dyadic_range(grid: Grid2D, mode: str = HOMOGENEOUS) -> List[int]:
    idx = shell_index(grid, mode)
    return sorted(int(j) for j in np.unique(idx[idx != ZERO_SHELL]))


def _shell_exponent(grid: Grid2D, N: float, mode: str) -> int:
    if not N > 0:
        raise SpectralUsageError(f"N debe ser positivo: {N}")
    j = math.log2(N)
    if abs(j - round(j)) > 1e-9:
        raise SpectralUsageError(f"N={N} no es diádico")
    j = int(round(j))
    rng = dyadic_range(grid, mode)
    if not rng or j < rng[0] or j > rng[-1]:
        raise SpectralUsageError(f"N=2^{j} fuera del rango de la retícula [2^{rng[0]}, 2^{rng[-1]}]")
    return j


def lp_project(field: ComplexField2D, N: float, mode: str = HOMOGENEOUS) -> ComplexField2D:
    """Corte característico sobre la capa N ≤ |ξ| < 2N (o ⟨ξ⟩)."""
    f = as_fourier(field)
    j = _shell_exponent(f.grid, N, mode)
    mask = shell_index(f.grid, mode) == j
    return f.with_samples(f.samples * mask, FOURIER)


def shell_norms(field: ComplexField2D, mode: str = HOMOGENEOUS) -> Dict[float, float]:
    """‖P_N f‖ para cada capa presente, ordenado por N."""
    f = as_fourier(field)
    idx = shell_index(f.grid, mode)
    energy = np.sum(np.abs(f.samples.reshape(-1, f.grid.n, f.grid.n)) ** 2, axis=0)
    out: Dict[float, float] = {}
    for j in dyadic_range(f.grid, mode):
        out[2.0 ** j] = float(np.sqrt(np.sum(energy[idx == j])))
    return out


# -----------------------------------------------------------------------------
# Sectores angulares
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class Sector:
    gamma: float
    omega: Tuple[float, float]

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma <= math.pi + 1e-15:
            raise SpectralUsageError(f"gamma fuera de (0, π]: {self.gamma}")
        if abs(math.hypot(*self.omega) - 1.0) > 1e-9:
            raise SpectralUsageError(f"omega debe ser unitario: {self.omega}")


def omega_family(gamma: float) -> np.ndarray:
    """Ω(γ) = {(cos kγ', sin kγ')}, γ' = 2π/⌈2π/γ⌉."""
    if not 0.0 < gamma <= math.pi + 1e-15:
        raise SpectralUsageError(f"gamma fuera de (0, π]: {gamma}")
    count = int(math.ceil(2.0 * math.pi / gamma - 1e-12))
    phi = 2.0 * math.pi * np.arange(count) / count
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


def direction_angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """θ(a, b) por atan2(|a×b|, a·b), vectorizado sobre el último eje."""
    cross = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    dot = a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1]
    return np.arctan2(np.abs(cross), dot)


def sector_mask(grid: Grid2D, sector: Sector, sign: int = 1) -> np.ndarray:
    xi = np.stack([sign * grid.kx, sign * grid.ky], axis=-1)
    om = np.broadcast_to(np.asarray(sector.omega, dtype=float), xi.shape)
    theta = direction_angle(xi, om)
    return (grid.kabs > 0) & (theta <= sector.gamma + 1e-12)


def sector_project(field: ComplexField2D, sector: Sector, sign: int = 1) -> ComplexField2D:
    f = as_fourier(field)
    return f.with_samples(f.samples * sector_mask(f.grid, sector, sign), FOURIER)


# -----------------------------------------------------------------------------
# Operadores diferenciales
# -----------------------------------------------------------------------------
def gradient(field: ComplexField2D) -> ComplexField2D:
    f = as_fourier(field)
    g = f.grid
    return f.with_samples(np.stack([1j * g.kxd * f.samples, 1j * g.kyd * f.samples]), FOURIER)


def divergence(field: ComplexField2D) -> ComplexField2D:
    f = as_fourier(field)
    g = f.grid
    v = f.samples
    return f.with_samples(1j * g.kxd * v[0] + 1j * g.kyd * v[1], FOURIER)


def curl_scalar(field: ComplexField2D) -> ComplexField2D:
    """(∇×v)³ = ∂₁v₂ − ∂₂v₁."""
    f = as_fourier(field)
    g = f.grid
    v = f.samples
    return f.with_samples(1j * g.kxd * v[1] - 1j * g.kyd * v[0], FOURIER)


def curl_of_normal(field: ComplexField2D) -> ComplexField2D:
    """∇×(0,0,b) = (∂₂b, −∂₁b)."""
    f = as_fourier(field)
    g = f.grid
    b = f.samples
    return f.with_samples(np.stack([1j * g.kyd * b, -1j * g.kxd * b]), FOURIER)


def laplacian(field: ComplexField2D) -> ComplexField2D:
    f = as_fourier(field)
    return f.with_samples(-(f.grid.kabs ** 2) * f.samples, FOURIER)


def div_free_project(field: ComplexField2D) -> ComplexField2D:
    """
    P_df = −Δ⁻¹∇×∇×: proyección sobre ξ^⊥ modo a modo. El modo cero pasa
    intacto; la fila/columna de Nyquist se anula.
    """
    f = as_fourier(field)
    g = f.grid
    v = f.samples
    k2 = g.kxd ** 2 + g.kyd ** 2
    safe = np.where(k2 > 0, k2, 1.0)
    kdotv = (g.kxd * v[0] + g.kyd * v[1]) / safe
    out = np.stack([v[0] - g.kxd * kdotv, v[1] - g.kyd * kdotv])
    out = np.where(g.nyquist_mask, 0.0, out)
    out[:, 0, 0] = v[:, 0, 0]
    return f.with_samples(out, FOURIER)


def inv_laplacian(field: ComplexField2D, zero_mode_policy: str = "error") -> ComplexField2D:
    """Δ⁻¹ con símbolo −1/|ξ|² fuera del modo cero."""
    f = as_fourier(field)
    g = f.grid
    c = f.samples
    if zero_mode_policy == "error":
        total = float(np.sqrt(np.sum(np.abs(c) ** 2)))
        mean = float(np.sqrt(np.sum(np.abs(c[..., 0, 0]) ** 2)))
        if mean > 1e-12 * max(total, 1e-300) and mean > 0.0:
            raise ConstraintViolation("Δ⁻¹ de un campo con media no nula (zero_mode_policy='error')")
    elif zero_mode_policy != "annihilate":
        raise SpectralUsageError(f"política de modo cero desconocida: {zero_mode_policy!r}")
    k2 = g.kabs ** 2
    sym = np.where(k2 > 0, -1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    return f.with_samples(c * sym, FOURIER)


def dealias(field: ComplexField2D) -> ComplexField2D:
    f = as_fourier(field)
    return f.with_samples(f.samples * f.grid.dealias_mask, FOURIER)


# -----------------------------------------------------------------------------
# Sumas por capas alrededor de un corte de frecuencia
# -----------------------------------------------------------------------------
def low_shell_sum(field: ComplexField2D, cutoff: float) -> float:
    """Σ_{0<N<cutoff} ‖P_{|ξ|∼N} P_{|ξ|<cutoff} f‖, sumado en orden creciente de N."""
    f = as_fourier(field)
    g = f.grid
    idx = shell_index(g, HOMOGENEOUS)
    energy = np.sum(np.abs(f.samples.reshape(-1, g.n, g.n)) ** 2, axis=0)
    below = (g.kabs > 0) & (g.kabs < cutoff)
    total = 0.0
    for j in dyadic_range(g, HOMOGENEOUS):
        if 2.0 ** j >= cutoff:
            break
        total += float(np.sqrt(np.sum(energy[(idx == j) & below])))
    return total


def high_sobolev_norm(field: ComplexField2D, cutoff: float, s: float) -> float:
    """‖P_{|ξ|≥cutoff} f‖_{H^s}."""
    f = as_fourier(field)
    g = f.grid
    energy = np.sum(np.abs(f.samples.reshape(-1, g.n, g.n)) ** 2, axis=0)
    above = g.kabs >= cutoff
    return float(np.sqrt(np.sum(energy[above] * g.kbracket[above] ** (2.0 * s))))
