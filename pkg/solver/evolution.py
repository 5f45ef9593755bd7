# solver/evolution.py
# -*- coding: utf-8 -*-
"""
Evolución del sistema acoplado Dirac + potencial de Lorenz.

Ecuaciones (□ = −∂ₜ² + Δ):
  ∂ₜψ = −i(α·D + Mβ)ψ + iVψ,   V = A₀I + A₁σ¹ + A₂σ²
  ∂ₜ²A_μ = ΔA_μ + J_μ,          J_μ = (−(J⁰ − media), J¹, J²)

Integrador de Strang: medio paso cinético exacto (Dirac libre con masa y
ondas libres para A), impulso del acoplamiento en espacio físico y otro
medio paso cinético. El impulso es unitario punto a punto.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from solver.dirac import SIGMA1, SIGMA2, project_coeffs
from solver.errors import BlowUpError
from solver.initial_data import (
    ChargeClassData,
    Current,
    PotentialState,
    current,
    gauss_residual,
    potential_data,
    reconstruct_em,
    split_em,
)
from solver.norms import NormReport, SpaceTimeGrid, data_norm_DT, spacetime_forward, xsb_norm
from solver.spectral import (
    Grid2D,
    backward,
    div_free_project,
    forward,
    fourier_field,
)
from utils.telemetry import log_simple

GENERATORS = ("wave+", "wave-", "kg+", "kg-")
PROJECTION_DRIFT_TOL = 1e-10
CHARGE_STEP_TOL = 1e-10


# -----------------------------------------------------------------------------
# Estados
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class DiracState:
    grid: Grid2D
    psi_plus: np.ndarray   # (2, n, n) físico
    psi_minus: np.ndarray
    time: float = 0.0

    @property
    def psi(self) -> np.ndarray:
        return self.psi_plus + self.psi_minus

    @classmethod
    def from_psi(cls, grid: Grid2D, psi: np.ndarray, time: float = 0.0) -> "DiracState":
        c = forward(grid, psi)
        return cls(grid, backward(grid, project_coeffs(grid, c, 1)), backward(grid, project_coeffs(grid, c, -1)), time)

    def projection_drift(self) -> float:
        g = self.grid
        drift = 0.0
        for sign, part in ((1, self.psi_plus), (-1, self.psi_minus)):
            c = forward(g, part)
            drift += float(np.sqrt(np.sum(np.abs(project_coeffs(g, c, sign) - c) ** 2)))
        return drift


@dataclass(frozen=True)
class CoupledState:
    dirac: DiracState
    potential: PotentialState
    mass: float = 1.0
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def grid(self) -> Grid2D:
        return self.dirac.grid

    @property
    def time(self) -> float:
        return self.dirac.time

    @cached_property
    def current(self) -> Current:
        return current(self.dirac.psi)

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.dirac.psi_plus))
            and np.all(np.isfinite(self.dirac.psi_minus))
            and np.all(np.isfinite(self.potential.A))
            and np.all(np.isfinite(self.potential.At))
        )


@dataclass
class PicardReport:
    p: List[float]
    q: List[float]
    converged: bool
    n_star: Optional[int]
    non_contraction: bool = False
    final_psi: Optional[np.ndarray] = None

    @property
    def ratios(self) -> List[float]:
        return [b / a if a > 0 else 0.0 for a, b in zip(self.q[:-1], self.q[1:])]


@dataclass
class Trajectory:
    snapshots: List[CoupledState]
    rows: List[Dict[str, float]]

    @property
    def final(self) -> CoupledState:
        return self.snapshots[-1]

    def series(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows])


# -----------------------------------------------------------------------------
# Piezas del integrador
# -----------------------------------------------------------------------------
def _sin_over(omega: np.ndarray, tau: float) -> np.ndarray:
    """sin(ωτ)/ω, con límite τ en ω = 0."""
    return tau * np.sinc(omega * tau / math.pi)


def dirac_kinetic(grid: Grid2D, c: np.ndarray, tau: float, mass: float) -> np.ndarray:
    """e^{−iτ(α·ξ + Mβ)} modo a modo sobre coeficientes (2, n, n)."""
    kx, ky = grid.kx, grid.ky
    omega = np.sqrt(grid.kabs ** 2 + mass ** 2)
    cs = np.cos(omega * tau)
    sn = _sin_over(omega, tau)
    c0, c1 = c[0], c[1]
    h0 = mass * c0 + (kx - 1j * ky) * c1
    h1 = (kx + 1j * ky) * c0 - mass * c1
    return np.stack([cs * c0 - 1j * sn * h0, cs * c1 - 1j * sn * h1])


def wave_flow(grid: Grid2D, a: np.ndarray, at: np.ndarray, tau: float) -> Tuple[np.ndarray, np.ndarray]:
    """Flujo exacto de a_tt = Δa en Fourier; el modo cero avanza a += τ·a_t."""
    k = grid.kabs
    cs = np.cos(k * tau)
    sn = _sin_over(k, tau)
    return cs * a + sn * at, -(k ** 2) * sn * a + cs * at


def coupling_exponential(A: np.ndarray, psi: np.ndarray, tau: float) -> np.ndarray:
    """exp(iτV)ψ punto a punto, V = A₀I + A₁σ¹ + A₂σ² hermítica."""
    A0, A1, A2 = A[0], A[1], A[2]
    amag = np.hypot(A1, A2)
    cs = np.cos(tau * amag)
    sn = _sin_over(amag, tau)
    p0, p1 = psi[0], psi[1]
    s0 = (A1 - 1j * A2) * p1
    s1 = (A1 + 1j * A2) * p0
    phase = np.exp(1j * tau * A0)
    return np.stack([phase * (cs * p0 + 1j * sn * s0), phase * (cs * p1 + 1j * sn * s1)])


def coupling_potential(A: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """Vψ = A_μα^μψ punto a punto."""
    return np.stack([A[0] * psi[0] + (A[1] - 1j * A[2]) * psi[1], A[0] * psi[1] + (A[1] + 1j * A[2]) * psi[0]])


def potential_source(grid: Grid2D, psi: np.ndarray) -> np.ndarray:
    """J_μ bajado y neutralizado: (−(J⁰ − media), J¹, J²), desaliasado."""
    J = current(psi)
    src = np.stack([-(J.J0 - J.J0.mean()), J.J1, J.J2])
    return backward(grid, forward(grid, src) * grid.dealias_mask).real


def _advance(
    grid: Grid2D,
    psi_hat: np.ndarray,
    A: np.ndarray,
    At: np.ndarray,
    dt: float,
    mass: float,
    sources: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """
    Un paso de Strang. Con `sources` = (J_antes, J_después) los impulsos de
    ∂ₜA usan esas fuentes en lugar de las del propio ψ (modo Picard).
    Devuelve (ψ̂, A, ∂ₜA, J_antes, J_después).
    """
    half = 0.5 * dt
    psi_hat = dirac_kinetic(grid, psi_hat, half, mass)
    a_hat, at_hat = wave_flow(grid, forward(grid, A), forward(grid, At), half)
    A = backward(grid, a_hat).real
    At = backward(grid, at_hat).real

    psi = backward(grid, psi_hat)
    J_pre = potential_source(grid, psi)
    psi = coupling_exponential(A, psi, dt)
    psi_hat = forward(grid, psi) * grid.dealias_mask
    J_post = potential_source(grid, backward(grid, psi_hat))
    kick_pre, kick_post = sources if sources is not None else (J_pre, J_post)
    At = At + half * (kick_pre + kick_post)

    psi_hat = dirac_kinetic(grid, psi_hat, half, mass)
    a_hat, at_hat = wave_flow(grid, forward(grid, A), forward(grid, At), half)
    return psi_hat, backward(grid, a_hat).real, backward(grid, at_hat).real, J_pre, J_post


# -----------------------------------------------------------------------------
# Operaciones
# -----------------------------------------------------------------------------
def free_propagate(grid: Grid2D, samples: np.ndarray, t: float, generator: str = "wave+") -> np.ndarray:
    """Solución de (−i∂ₜ ± φ(D))u = 0: e^{∓itφ(D)}u, φ = |ξ| (wave) o ⟨ξ⟩ (kg)."""
    if generator not in GENERATORS:
        raise ValueError(f"generador desconocido: {generator!r} (opciones: {GENERATORS})")
    phi = grid.kabs if generator.startswith("wave") else grid.kbracket
    sign = 1.0 if generator.endswith("+") else -1.0
    return backward(grid, forward(grid, samples) * np.exp(-1j * sign * t * phi))


def initial_state(data: ChargeClassData, mass: float = 1.0) -> CoupledState:
    dirac = DiracState.from_psi(data.grid, data.psi0, 0.0)
    state = CoupledState(dirac, potential_data(data), mass)
    return replace(state, diagnostics=compute_diagnostics(state))


def dirac_rhs(state: CoupledState) -> Tuple[np.ndarray, np.ndarray]:
    """R± = (−i∂ₜ ± |D|)ψ± = −Π±(Mβψ) + Π±(Vψ)."""
    g = state.grid
    psi = state.dirac.psi
    beta_psi = np.stack([psi[0], -psi[1]])
    total = -state.mass * beta_psi + coupling_potential(state.potential.A, psi)
    c = forward(g, total) * g.dealias_mask
    return backward(g, project_coeffs(g, c, 1)), backward(g, project_coeffs(g, c, -1))


def potential_rhs(state: CoupledState) -> np.ndarray:
    """∂ₜ²A_μ = ΔA_μ + J_μ (J bajado, neutralizado); en ξ=0 queda ∂ₜ²Â(0) = Ĵ_μ(0)."""
    g = state.grid
    lap = backward(g, -(g.kabs ** 2) * forward(g, state.potential.A)).real
    return lap + potential_source(g, state.dirac.psi)


def dirac_time_derivative(state: CoupledState) -> np.ndarray:
    """∂ₜψ = −i(α·D + Mβ)ψ + iVψ."""
    g = state.grid
    psi = state.dirac.psi
    c = forward(g, psi)
    kx, ky = g.kx, g.ky
    Hc = np.stack([state.mass * c[0] + (kx - 1j * ky) * c[1], (kx + 1j * ky) * c[0] - state.mass * c[1]])
    return -1j * backward(g, Hc) + 1j * coupling_potential(state.potential.A, psi)


def em_split_rhs(state: CoupledState) -> Dict[str, np.ndarray]:
    """
    Lados derechos de las ecuaciones de primer orden de las componentes ±:
      (−i∂ₜ ± ⟨D⟩)E^df_± = −(±2⟨D⟩)⁻¹[P_df ∂ₜ𝐉 − E^df]
      (−i∂ₜ ± |D|)B³_±   =  (±2|D|)⁻¹(∂₁J₂ − ∂₂J₁)
    (P_df anula ∇J₀; □B³ = −(∇×𝐉)³ fija el signo de la segunda).
    """
    g = state.grid
    psi = state.dirac.psi
    psi_t = dirac_time_derivative(state)
    dJ = np.stack([2.0 * np.real(np.einsum("ij,j...,i...->...", m, psi_t, np.conj(psi))) for m in (SIGMA1, SIGMA2)])
    em = reconstruct_em(state.potential)
    e_src = div_free_project(fourier_field(g, forward(g, dJ))).samples - forward(g, em["Edf"])
    j_hat = forward(g, state.current.spatial)
    b_src = 1j * g.kxd * j_hat[1] - 1j * g.kyd * j_hat[0]
    inv_abs = np.where(g.kabs > 0, 1.0 / np.where(g.kabs > 0, g.kabs, 1.0), 0.0)
    out = {}
    for name, sign in (("plus", 1.0), ("minus", -1.0)):
        out[f"Edf_{name}"] = backward(g, -e_src / (sign * 2.0 * g.kbracket))
        out[f"B3_{name}"] = backward(g, b_src * inv_abs / (sign * 2.0))
    return out


def compute_diagnostics(state: CoupledState, T_norm: Optional[float] = None) -> Dict[str, float]:
    g = state.grid
    pot = state.potential
    em = reconstruct_em(pot)
    psi = state.dirac.psi
    charge = float(np.sum(np.abs(psi) ** 2) * g.dx ** 2)
    div_a = 1j * g.kxd * forward(g, pot.A[1]) + 1j * g.kyd * forward(g, pot.A[2])
    lorenz = float(np.sqrt(np.sum(np.abs(forward(g, pot.At[0]) - div_a) ** 2)))
    energy = 0.5 * float((np.sum(em["E"] ** 2) + np.sum(em["B3"] ** 2)) * g.dx ** 2)
    diag = {
        "t": state.time,
        "charge": charge,
        "gauss_residual": gauss_residual(g, em["E"], psi),
        "lorenz_residual": lorenz,
        "energy": energy,
    }
    if T_norm is not None:
        report = em_norm_report(state, T_norm)
        diag["D_T"] = report.D_T
        diag["tildeD_T"] = report.tildeD_T
    return diag


def em_norm_report(state: CoupledState, T: float) -> NormReport:
    em = reconstruct_em(state.potential)
    split = split_em(em["Edf"], em["B3"], state.current, state.grid)
    return data_norm_DT(split, T)


def step(state: CoupledState, dt: float) -> CoupledState:
    if not state.is_finite():
        raise BlowUpError("estado de entrada no finito", last_state=state, t=state.time)
    g = state.grid
    before = float(np.sum(np.abs(state.dirac.psi) ** 2) * g.dx ** 2)
    psi_hat, A, At, _, _ = _advance(g, forward(g, state.dirac.psi), state.potential.A, state.potential.At, dt, state.mass)
    new_dirac = DiracState(
        g,
        backward(g, project_coeffs(g, psi_hat, 1)),
        backward(g, project_coeffs(g, psi_hat, -1)),
        state.time + dt,
    )
    # Σ|ψ̂|² = ‖ψ‖² con la normalización de `forward`
    change = abs(float(np.sum(np.abs(psi_hat) ** 2)) - before) / before if before > 0 else 0.0
    drift = new_dirac.projection_drift()
    if drift > PROJECTION_DRIFT_TOL or change > CHARGE_STEP_TOL:
        log_simple("step_drift", "evolution.step", {"t": state.time, "projection": drift, "charge": change})
    new = CoupledState(new_dirac, PotentialState(g, A, At), state.mass)
    if not new.is_finite():
        raise BlowUpError(f"estado no finito en t={new.time:.6g}", last_state=state, t=state.time)
    return replace(new, diagnostics=compute_diagnostics(new))


def _step_count(T: float, dt: float) -> Tuple[int, float]:
    n = max(1, int(math.ceil(T / dt - 1e-9)))
    return n, T / n


def solve_interval(
    state: CoupledState,
    T: float,
    dt: float,
    record_every: int = 1,
    T_norm: Optional[float] = None,
) -> Trajectory:
    """
    Integra en [t, t+T]. Registra una fila de diagnósticos cada `record_every`
    pasos (y al final); con T_norm añade D_T y D̃_T.
    """
    if not T > 0:
        raise ValueError(f"T debe ser positivo (T={T})")
    n, h = _step_count(T, dt)
    record_every = max(1, int(record_every))
    first = replace(state, diagnostics=compute_diagnostics(state, T_norm))
    snaps = [first]
    rows = [dict(first.diagnostics)]
    cur = first
    for k in range(1, n + 1):
        cur = step(cur, h)
        if k % record_every == 0 or k == n:
            cur = replace(cur, diagnostics=compute_diagnostics(cur, T_norm))
            snaps.append(cur)
            rows.append(dict(cur.diagnostics))
    return Trajectory(snaps, rows)


# -----------------------------------------------------------------------------
# Oráculos de □⁻¹
# -----------------------------------------------------------------------------
def _phase_quotient(x: np.ndarray, t: float) -> np.ndarray:
    """(e^{itx} − 1)/x con límite it en x = 0."""
    small = np.abs(x) < 1e-12
    safe = np.where(small, 1.0, x)
    return np.where(small, 1j * t, (np.exp(1j * t * x) - 1.0) / safe)


def duhamel_box_inverse(stg: SpaceTimeGrid, G: np.ndarray, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Componentes u± de u = □⁻¹G con datos nulos en t=0, para G muestreada en la
    ventana de `stg`:
      û±(t,ξ) = ∓(e^{∓it|ξ|}/(2|ξ|)) Σ_m c_m (e^{it(τ_m±|ξ|)} − 1)/(τ_m ± |ξ|)
    con G(t,ξ) = Σ_m c_m e^{iτ_m t}. El modo ξ=0 se excluye (queda en 0).
    """
    g = stg.grid
    c = spacetime_forward(stg, G) / math.sqrt(2.0 * stg.T_win)
    k = g.kabs
    safe_k = np.where(k > 0, k, 1.0)
    tau = stg.tau[:, None, None]
    out = []
    for sign in (1.0, -1.0):
        q = _phase_quotient(tau + sign * k[None], t)
        s = np.sum(c * q, axis=0)
        u_hat = -sign * np.exp(-1j * sign * t * k) / (2.0 * safe_k) * s
        u_hat = np.where(k > 0, u_hat, 0.0)
        out.append(backward(g, u_hat))
    return out[0], out[1]


def spacetime_evaluate(stg: SpaceTimeGrid, G: np.ndarray) -> Callable[[float], np.ndarray]:
    """Interpolante trigonométrico en t de G: devuelve t ↦ Ĝ(t, ξ)."""
    c = spacetime_forward(stg, G) / math.sqrt(2.0 * stg.T_win)
    tau = stg.tau

    def at(t: float) -> np.ndarray:
        return np.tensordot(np.exp(1j * tau * t), c, axes=(0, 0))

    return at


def leapfrog_wave_solve(
    grid: Grid2D,
    source: Callable[[float], np.ndarray],
    t: float,
    nsteps: int = 512,
    richardson: bool = True,
) -> np.ndarray:
    """
    □u = G con u(0) = ∂ₜu(0) = 0 por Verlet de velocidad en Fourier
    (û'' = −|ξ|²û − Ĝ). `source(t)` devuelve Ĝ(t). Con Richardson combina
    los pasos h y h/2. Devuelve û(t).
    """
    k2 = grid.kabs ** 2

    def run(steps: int) -> np.ndarray:
        h = t / steps
        u = np.zeros((grid.n, grid.n), dtype=complex)
        v = np.zeros_like(u)
        acc = -k2 * u - source(0.0)
        for m in range(steps):
            v = v + 0.5 * h * acc
            u = u + h * v
            acc = -k2 * u - source((m + 1) * h)
            v = v + 0.5 * h * acc
        return u

    coarse = run(nsteps)
    if not richardson:
        return coarse
    fine = run(2 * nsteps)
    return (4.0 * fine - coarse) / 3.0


# -----------------------------------------------------------------------------
# Iteración de Picard
# -----------------------------------------------------------------------------
def picard_iterate(
    data: ChargeClassData,
    T: float,
    dt: float,
    n_max: int = 8,
    mass: float = 1.0,
    tol: float = 1e-10,
) -> PicardReport:
    """
    ψ^{(−1)} = 0; el iterado n resuelve el problema lineal con las corrientes
    del iterado n−1 como fuente de A, discretizado con el mismo integrador.
    p_n = Σ± ‖ψ^{(n)}_±‖_{X^{0,1/2;1}_±}, q_n = Σ± ‖ψ^{(n)}_± − ψ^{(n−1)}_±‖ en
    la ventana [0, T).
    """
    g = data.grid
    steps, h = _step_count(T, dt)
    if steps % 2:
        steps += 1
        h = T / steps
    stg = SpaceTimeGrid(g, T_win=T / 2.0, nt=steps, t0=0.0)
    start = initial_state(data, mass)
    zeros = np.zeros((3, g.n, g.n))
    prev_sources = [(zeros, zeros)] * steps
    prev_samples: Optional[Dict[int, np.ndarray]] = None

    p: List[float] = []
    q: List[float] = []
    growth = 0
    converged = False
    non_contraction = False
    n_star: Optional[int] = None
    final_psi = None
    for n in range(n_max):
        psi_hat = forward(g, start.dirac.psi)
        A, At = start.potential.A, start.potential.At
        samples = {1: np.empty((2, steps, g.n, g.n), complex), -1: np.empty((2, steps, g.n, g.n), complex)}
        sources = []
        for k in range(steps):
            for sign in (1, -1):
                samples[sign][:, k] = backward(g, project_coeffs(g, psi_hat, sign))
            psi_hat, A, At, J_pre, J_post = _advance(g, psi_hat, A, At, h, mass, prev_sources[k])
            sources.append((J_pre, J_post))
            if not np.all(np.isfinite(psi_hat)):
                raise BlowUpError(f"iterado {n} no finito", t=k * h)
        final_psi = backward(g, psi_hat)
        p.append(sum(xsb_norm(stg, samples[s], 0.0, 0.5, 1, "+abs" if s > 0 else "-abs") for s in (1, -1)))
        if prev_samples is None:
            diff = p[-1]
        else:
            diff = sum(
                xsb_norm(stg, samples[s] - prev_samples[s], 0.0, 0.5, 1, "+abs" if s > 0 else "-abs")
                for s in (1, -1)
            )
        q.append(diff)
        if len(q) >= 2 and q[-1] > q[-2]:
            growth += 1
        else:
            growth = 0
        if diff <= tol * max(1.0, p[-1]) and (n >= 1 or p[-1] == 0.0):
            converged = True
            n_star = n
            break
        if growth >= 3:
            non_contraction = True
            log_simple("picard_non_contraction", "evolution.picard_iterate", {"n": n, "q": q[-4:]})
            break
        prev_sources = sources
        prev_samples = samples
    return PicardReport(p, q, converged, n_star, non_contraction, final_psi)
