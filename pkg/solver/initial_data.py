# solver/initial_data.py
# -*- coding: utf-8 -*-
"""
Datos en la clase de carga, restricción de Gauss, potencial de Lorenz y
separación ± de los campos electromagnéticos.

Ley de Gauss en el toro: ∇·E₀ = |ψ₀|² − media(|ψ₀|²); la constante
eliminada se devuelve en los informes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from solver.dirac import DIRAC
from solver.spectral import (
    ComplexField2D,
    FOURIER,
    Grid2D,
    abs_power,
    apply_multiplier,
    backward,
    bracket_power,
    curl_of_normal,
    curl_scalar,
    dealias,
    div_free_project,
    forward,
    fourier_field,
    gradient,
    high_sobolev_norm,
    inv_laplacian,
    low_shell_sum,
    physical_field,
)


# -----------------------------------------------------------------------------
# Tipos
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ChargeClassData:
    grid: Grid2D
    psi0: np.ndarray   # (2, n, n) complejo
    E0df: np.ndarray   # (2, n, n) real
    B03: np.ndarray    # (n, n) real

    @property
    def charge(self) -> float:
        return float(np.sum(np.abs(self.psi0) ** 2) * self.grid.dx ** 2)


@dataclass(frozen=True)
class PotentialState:
    """(A_μ, ∂ₜA_μ) con índices abajo, muestras físicas reales (3, n, n)."""

    grid: Grid2D
    A: np.ndarray
    At: np.ndarray

    def half_waves(self) -> Tuple[np.ndarray, np.ndarray]:
        """A_{j,±} = ½(A_j ± i|D|⁻¹∂ₜA_j), j = 1, 2; en ξ=0 se toma ½A_j."""
        g = self.grid
        a = forward(g, self.A[1:])
        at = forward(g, self.At[1:])
        inv = np.where(g.kabs > 0, 1.0 / np.where(g.kabs > 0, g.kabs, 1.0), 0.0)
        plus = 0.5 * (a + 1j * inv * at)
        minus = 0.5 * (a - 1j * inv * at)
        return backward(g, plus), backward(g, minus)


@dataclass(frozen=True)
class EMSplit:
    grid: Grid2D
    Edf_plus: np.ndarray   # (2, n, n) complejo
    Edf_minus: np.ndarray
    B3_plus: np.ndarray    # (n, n) complejo
    B3_minus: np.ndarray


@dataclass(frozen=True)
class Current:
    J0: np.ndarray
    J1: np.ndarray
    J2: np.ndarray

    def upper(self) -> np.ndarray:
        return np.stack([self.J0, self.J1, self.J2])

    def lowered(self) -> np.ndarray:
        """J_μ = (−J⁰, J¹, J²)."""
        return np.stack([-self.J0, self.J1, self.J2])

    @property
    def spatial(self) -> np.ndarray:
        return np.stack([self.J1, self.J2])


# -----------------------------------------------------------------------------
# Generadores de datos
# -----------------------------------------------------------------------------
def gaussian_profile(
    grid: Grid2D,
    amplitude: float,
    width: float,
    center: Optional[Sequence[float]] = None,
    momentum: Optional[Sequence[float]] = None,
) -> np.ndarray:
    """amplitude·exp(−|x−c|²/(2w²))·e^{ik₀·x}, con distancia periódica mínima."""
    x1, x2 = grid.coords
    L = grid.box_period
    c = center if center is not None else (L / 2.0, L / 2.0)
    d1 = (x1 - c[0] + L / 2.0) % L - L / 2.0
    d2 = (x2 - c[1] + L / 2.0) % L - L / 2.0
    prof = amplitude * np.exp(-(d1 ** 2 + d2 ** 2) / (2.0 * width ** 2))
    if momentum is not None:
        prof = prof * np.exp(1j * (momentum[0] * x1 + momentum[1] * x2))
    return prof


def random_band(
    grid: Grid2D,
    rng: np.random.Generator,
    band: Sequence[float],
    amplitude: float,
    components: int = 1,
    real: bool = True,
) -> np.ndarray:
    """
    Campo gaussiano aleatorio con soporte de Fourier en band[0] ≤ |ξ| ≤ band[1],
    normalizado a valor cuadrático medio `amplitude`.
    """
    shape = (components, grid.n, grid.n)
    support = (grid.kabs >= band[0]) & (grid.kabs <= band[1]) & grid.dealias_mask
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * support
    samples = backward(grid, coeffs)
    if real:
        samples = samples.real
    rms = math.sqrt(float(np.mean(np.abs(samples) ** 2)))
    if rms == 0.0:
        return np.zeros(shape, dtype=float if real else complex)
    return samples * (amplitude / rms)


def _field_from_spec(
    grid: Grid2D,
    spec: Dict[str, Any],
    rng: np.random.Generator,
    components: int,
    real: bool,
) -> np.ndarray:
    profile = spec.get("profile", "gaussian")
    amplitude = float(spec.get("amplitude", 0.0))
    if amplitude == 0.0 or profile == "zero":
        return np.zeros((components, grid.n, grid.n), dtype=float if real else complex)
    if profile == "gaussian":
        base = gaussian_profile(
            grid, amplitude, float(spec.get("width", 2.0)), spec.get("center"), spec.get("momentum")
        )
        direction = np.asarray(spec.get("polarization", [1.0] + [0.0] * (components - 1)), dtype=complex)
        direction = direction / np.linalg.norm(direction)
        out = direction[:, None, None] * base[None]
        return out.real if real else out
    if profile == "random-band":
        band = spec.get("band", [grid.k_min, 4.0 * grid.k_min])
        return random_band(grid, rng, band, amplitude, components, real)
    raise ValueError(f"perfil desconocido: {profile!r}")


def make_data(grid: Grid2D, spec: Dict[str, Dict[str, Any]], seed: int = 0) -> ChargeClassData:
    """
    Construye (ψ₀, E₀^df, B₀³) a partir de un bloque {psi, E, B}; cada campo
    usa su propia semilla derivada (o la suya propia si la declara).
    """
    def rng_for(name: str, idx: int) -> np.random.Generator:
        s = spec.get(name, {}).get("seed")
        return np.random.default_rng([int(seed if s is None else s), idx])

    psi = _field_from_spec(grid, spec.get("psi", {}), rng_for("psi", 0), 2, real=False)
    E = _field_from_spec(grid, spec.get("E", {}), rng_for("E", 1), 2, real=True)
    B = _field_from_spec(grid, spec.get("B", {}), rng_for("B", 2), 1, real=True)[0]

    mask = grid.dealias_mask
    psi = backward(grid, forward(grid, psi) * mask)
    Edf = div_free_project(fourier_field(grid, forward(grid, E) * mask))
    Edf_phys = backward(grid, Edf.samples).real
    B_phys = backward(grid, forward(grid, B) * mask).real
    return ChargeClassData(grid, psi, Edf_phys, B_phys)


def zero_data(grid: Grid2D) -> ChargeClassData:
    n = grid.n
    return ChargeClassData(grid, np.zeros((2, n, n), complex), np.zeros((2, n, n)), np.zeros((n, n)))


# -----------------------------------------------------------------------------
# Corriente y restricción de Gauss
# -----------------------------------------------------------------------------
def current(psi: np.ndarray) -> Current:
    """J^μ(x) = ⟨α^μψ(x), ψ(x)⟩ punto a punto."""
    psi = np.asarray(psi)
    J = np.einsum("i...,mij,j...->m...", np.conj(psi), DIRAC.alpha_upper, psi).real
    return Current(J[0], J[1], J[2])


def charge_density_coeffs(grid: Grid2D, psi: np.ndarray) -> np.ndarray:
    """ρ̂ sin modo cero ni fila/columna de Nyquist (retícula de derivadas)."""
    rho = forward(grid, np.sum(np.abs(psi) ** 2, axis=0))
    rho = np.where(grid.nyquist_mask, 0.0, rho)
    rho[0, 0] = 0.0
    return rho


def mean_charge(grid: Grid2D, psi: np.ndarray) -> float:
    return float(np.mean(np.sum(np.abs(psi) ** 2, axis=0)))


def assemble_E0(data: ChargeClassData) -> ComplexField2D:
    """E₀ = E₀^df + Δ⁻¹∇(|ψ₀|² − media)."""
    g = data.grid
    rho = fourier_field(g, charge_density_coeffs(g, data.psi0))
    longitudinal = inv_laplacian(gradient(rho), zero_mode_policy="annihilate")
    E0 = forward(g, data.E0df) + longitudinal.samples
    return physical_field(g, backward(g, E0).real)


def gauss_residual(grid: Grid2D, E: np.ndarray, psi: np.ndarray) -> float:
    """‖∇·E − (|ψ|² − media)‖ en la retícula de derivadas."""
    div = 1j * grid.kxd * forward(grid, E[0]) + 1j * grid.kyd * forward(grid, E[1])
    rho = charge_density_coeffs(grid, psi)
    return float(np.sqrt(np.sum(np.abs(div - rho) ** 2)))


# -----------------------------------------------------------------------------
# Potencial y reconstrucción
# -----------------------------------------------------------------------------
def potential_data(data: ChargeClassData) -> PotentialState:
    """a₀ = ȧ₀ = 0, a = −Δ⁻¹(∂₂B₀³, −∂₁B₀³), ȧ = −E₀."""
    g = data.grid
    B = fourier_field(g, forward(g, data.B03))
    a = inv_laplacian(curl_of_normal(B), zero_mode_policy="annihilate").samples * -1.0
    E0 = assemble_E0(data).samples.real
    n = g.n
    A = np.zeros((3, n, n))
    At = np.zeros((3, n, n))
    A[1:] = backward(g, a).real
    At[1:] = -E0
    return PotentialState(g, A, At)


def reconstruct_em(pot: PotentialState) -> Dict[str, np.ndarray]:
    """E = ∇A₀ − ∂ₜ𝐀, B³ = ∂₁A₂ − ∂₂A₁ y E^df = P_df E."""
    g = pot.grid
    A0 = fourier_field(g, forward(g, pot.A[0]))
    Avec = fourier_field(g, forward(g, pot.A[1:]))
    E_hat = gradient(A0).samples - forward(g, pot.At[1:])
    B_hat = curl_scalar(Avec).samples
    Edf_hat = div_free_project(fourier_field(g, E_hat)).samples
    return {
        "E": backward(g, E_hat).real,
        "B3": backward(g, B_hat).real,
        "Edf": backward(g, Edf_hat).real,
    }


def split_em(Edf: np.ndarray, B3: np.ndarray, J: Current, grid: Grid2D) -> EMSplit:
    """
    2E^df_± = E^df ± i⟨D⟩⁻¹[∇×(0,0,B³) − P_df 𝐉]
    2B³_±   = B³ ± i|D|⁻¹[−(∇×E^df)³]
    """
    g = grid
    E_hat = fourier_field(g, forward(g, Edf))
    B_hat = fourier_field(g, forward(g, B3))
    J_hat = fourier_field(g, forward(g, J.spatial))
    dtE = curl_of_normal(B_hat).samples - div_free_project(J_hat).samples
    dtE = apply_multiplier(bracket_power(-1.0), fourier_field(g, dtE)).samples
    dtB = -curl_scalar(E_hat).samples
    dtB = apply_multiplier(abs_power(-1.0), fourier_field(g, dtB), zero_mode_policy="annihilate").samples
    Ep = 0.5 * (E_hat.samples + 1j * dtE)
    Em = 0.5 * (E_hat.samples - 1j * dtE)
    Bp = 0.5 * (B_hat.samples + 1j * dtB)
    Bm = 0.5 * (B_hat.samples - 1j * dtB)
    return EMSplit(g, backward(g, Ep), backward(g, Em), backward(g, Bp), backward(g, Bm))


# -----------------------------------------------------------------------------
# Condiciones de Besov y estimaciones de la corriente
# -----------------------------------------------------------------------------
def besov_data_check(data: ChargeClassData, T: float = 1.0) -> Dict[str, Any]:
    g = data.grid
    em = np.concatenate([forward(g, data.E0df), forward(g, data.B03)[None]])
    em_field = fourier_field(g, em)
    cutoff = 1.0 / T
    low = math.sqrt(T) * low_shell_sum(em_field, cutoff)
    high = high_sobolev_norm(em_field, cutoff, -0.5)

    J = current(data.psi0)
    J_field = fourier_field(g, forward(g, J.spatial))
    j_low = low_shell_sum(J_field, 1.0)
    j_h32 = float(np.sqrt(np.sum(np.abs(J_field.samples) ** 2 * g.kbracket ** -3.0)))
    charge = data.charge
    ratio1 = j_low / charge if charge > 0 else 0.0
    ratio2 = j_h32 / charge if charge > 0 else 0.0
    values = [low, high, j_low, j_h32]
    return {
        "T": T,
        "em_low": low,
        "em_high": high,
        "current_low": j_low,
        "current_h_minus_3_2": j_h32,
        "current_low_ratio": ratio1,
        "current_h_minus_3_2_ratio": ratio2,
        "charge": charge,
        "removed_mean_charge": mean_charge(g, data.psi0),
        "finite": bool(all(math.isfinite(v) for v in values)),
    }
