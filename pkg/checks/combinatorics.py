# checks/combinatorics.py
# -*- coding: utf-8 -*-
"""
Comprobaciones combinatorias sobre las familias angulares Ω(γ):

- conteo de hiperplanos nulos engrosados H_d(ω) que contienen un punto,
- descomposiciones de Whitney angulares (separada y sin separar),
- inclusión K^±_{N,L,γ}(ω) ⊂ H_{max(L,Nγ²)}(ω),
- casi ortogonalidad de sectores y suma de pares adyacentes.

Todas usan constantes explícitas (no calibradas); los valores se obtienen
del espaciado γ' = 2π/⌈2π/γ⌉ ∈ (2γ/3, γ] de omega_family.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from checks.sampling import (
    LemmaResult,
    VerifierConfig,
    WavePacket,
    fixed_bound_check,
    log_uniform,
    merge_results,
    unit_vectors,
)
from solver.norms import SpaceTimeGrid
from solver.spectral import Grid2D, direction_angle, omega_family

# arco de la franja |ω¹ + τ/|ξ|| ≤ d/|ξ| ≤ 2π(d/N)^{1/2}; con γ' > 2γ/3 resulta 3π
C_HYPER = 3.0 * math.pi
WHITNEY_UPPER = 64.0
INCLUSION_FACTOR = 3.0
SECTOR_OVERLAP = 3.0
SECTOR_ADJACENCY = 2
SECTOR_SUM_BOUND = (2 * SECTOR_ADJACENCY + 1) * SECTOR_OVERLAP
ANGLE_TOL = 1e-12


# -----------------------------------------------------------------------------
# Utilidades de la familia Ω(γ)
# -----------------------------------------------------------------------------
def omega_spacing(gamma: float) -> Tuple[int, float]:
    count = int(math.ceil(2.0 * math.pi / gamma - 1e-12))
    return count, 2.0 * math.pi / count


def _circular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = np.mod(a - b, 2.0 * math.pi)
    return np.minimum(d, 2.0 * math.pi - d)


def _index_distance(j1: np.ndarray, j2: np.ndarray, count: int) -> np.ndarray:
    d = np.mod(j1 - j2, count)
    return np.minimum(d, count - d)


def sector_candidates(angles: np.ndarray, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Índices j de Ω(γ) cercanos a cada ángulo (5 candidatos) y si ξ ∈ Γ_γ(ω_j).
    Formas (m, 5).
    """
    count, spacing = omega_spacing(gamma)
    j0 = np.rint(angles / spacing).astype(np.int64)
    cand = np.mod(j0[:, None] + np.arange(-2, 3)[None, :], count)
    member = _circular_distance(angles[:, None], cand * spacing) <= gamma + ANGLE_TOL
    return cand, member


# -----------------------------------------------------------------------------
# Hiperplanos engrosados
# -----------------------------------------------------------------------------
def hyperplane_counts(tau: np.ndarray, xi: np.ndarray, d: np.ndarray, gamma: float) -> np.ndarray:
    """#{ω ∈ Ω(γ) : |τ + ξ·ω| ≤ d} para cada punto."""
    omegas = omega_family(gamma)
    proj = xi @ omegas.T
    return np.sum(np.abs(np.asarray(tau)[:, None] + proj) <= np.asarray(d)[:, None] + ANGLE_TOL, axis=1)


def hyperplane_bound(N: np.ndarray, d: np.ndarray, gamma: float) -> np.ndarray:
    return C_HYPER * (1.0 + np.sqrt(d / (N * gamma ** 2)))


def _hyperplane_points(rng: np.random.Generator, N: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    |ξ| ∈ [N, 2N); la mitad de los τ cerca de ∓|ξ| (tangencia, arco máximo),
    el resto uniforme en [−|ξ|−d, |ξ|+d].
    """
    m = N.size
    r = N * rng.uniform(1.0, 2.0, m)
    xi = r[:, None] * unit_vectors(rng, m)
    tangent = rng.random(m) < 0.5
    side = rng.choice(np.array([-1.0, 1.0]), m)
    tau_t = side * (r - rng.uniform(0.0, 2.0, m) * d)
    tau_u = rng.uniform(-1.0, 1.0, m) * (r + d)
    return np.where(tangent, tau_t, tau_u), xi


def verify_hyperplane_count(
    N: float,
    d: float,
    gamma: float,
    samples: int = 4096,
    seed: int = 0,
) -> Tuple[int, float]:
    """(máximo conteo observado, cota C(1 + (d/Nγ²)^{1/2})) para unos (N, d, γ) fijos."""
    if not (N > 0 and d > 0 and gamma > 0):
        raise ValueError(f"N, d y gamma deben ser positivos (N={N}, d={d}, gamma={gamma})")
    rng = np.random.default_rng(seed)
    Ns = np.full(samples, float(N))
    ds = np.full(samples, float(d))
    tau, xi = _hyperplane_points(rng, Ns, ds)
    counts = hyperplane_counts(tau, xi, ds, gamma)
    return int(counts.max()), float(hyperplane_bound(np.float64(N), np.float64(d), gamma))


def _hyperplane_sampler(gammas: Sequence[float]):
    def sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
        N = 2.0 ** rng.integers(0, 7, m)
        d = N * log_uniform(rng, 1e-4, 4.0, m)
        which = rng.integers(0, len(gammas), m)
        tau, xi = _hyperplane_points(rng, N, d)
        lhs = np.zeros(m)
        rhs = np.zeros(m)
        group = np.empty(m, dtype=object)
        for i, gamma in enumerate(gammas):
            sel = which == i
            if not sel.any():
                continue
            lhs[sel] = hyperplane_counts(tau[sel], xi[sel], d[sel], gamma)
            rhs[sel] = hyperplane_bound(N[sel], d[sel], gamma)
            group[sel] = f"gamma=pi/{round(math.pi / gamma)}"
        return {"lhs": lhs, "rhs": rhs, "group": group.astype(str)}

    return sampler


def verify_hyperplane_lemma(cfg: VerifierConfig) -> LemmaResult:
    """Σ_ω χ_{H_d(ω)}(τ, ξ) ≤ 3π(1 + (d/Nγ²)^{1/2}) para |ξ| ∈ [N, 2N)."""
    gammas = [math.pi / 2 ** j for j in range(0, 7)]
    return fixed_bound_check("hyperplane_count", _hyperplane_sampler(gammas), cfg)


# -----------------------------------------------------------------------------
# Descomposiciones de Whitney
# -----------------------------------------------------------------------------
def _random_pairs(rng: np.random.Generator, m: int, theta_lo: float = 1e-4) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ángulos (a₁, a₂) con θ(ξ₁, ξ₂) log-uniforme en [theta_lo, π]."""
    a1 = rng.uniform(0.0, 2.0 * math.pi, m)
    theta = log_uniform(rng, theta_lo, math.pi, m)
    a2 = np.mod(a1 + rng.choice(np.array([-1.0, 1.0]), m) * theta, 2.0 * math.pi)
    return a1, a2, _circular_distance(a1, a2)


def whitney_separated_sum(a1: np.ndarray, a2: np.ndarray, gammas: Sequence[float]) -> np.ndarray:
    """
    Σ_γ Σ_{3γ ≤ θ(ω₁,ω₂) ≤ 12γ} χ_{Γ_γ(ω₁)}(ξ₁)χ_{Γ_γ(ω₂)}(ξ₂), con ξ_j dados por su ángulo.
    """
    total = np.zeros(a1.shape)
    for gamma in gammas:
        count, spacing = omega_spacing(gamma)
        j1, m1 = sector_candidates(a1, gamma)
        j2, m2 = sector_candidates(a2, gamma)
        sep = _index_distance(j1[:, :, None], j2[:, None, :], count) * spacing
        ok = (sep >= 3.0 * gamma - ANGLE_TOL) & (sep <= 12.0 * gamma + ANGLE_TOL)
        total += np.sum(ok & m1[:, :, None] & m2[:, None, :], axis=(1, 2))
    return total


def whitney_adjacent_sum(a1: np.ndarray, a2: np.ndarray, gamma: float, k: int) -> np.ndarray:
    """Σ_{θ(ω₁,ω₂) ≤ (k+2)γ} χ_{Γ_γ(ω₁)}(ξ₁)χ_{Γ_γ(ω₂)}(ξ₂)."""
    count, spacing = omega_spacing(gamma)
    j1, m1 = sector_candidates(a1, gamma)
    j2, m2 = sector_candidates(a2, gamma)
    sep = _index_distance(j1[:, :, None], j2[:, None, :], count) * spacing
    ok = sep <= (k + 2) * gamma + ANGLE_TOL
    return np.sum(ok & m1[:, :, None] & m2[:, None, :], axis=(1, 2)).astype(float)


def _dyadic_gammas(theta_min: float) -> List[float]:
    """γ = 2^{-j} < 1 hasta θ_min/16."""
    out = []
    j = 1
    while True:
        gamma = 2.0 ** -j
        out.append(gamma)
        if gamma < theta_min / 16.0:
            return out
        j += 1


def _whitney_separated_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    # cubrimiento (≥ 1) y cota superior en filas alternas
    k = (m + 1) // 2
    a1, a2, theta = _random_pairs(rng, k)
    S = whitney_separated_sum(a1, a2, _dyadic_gammas(float(theta.min())))
    uncovered = np.where(S >= 1.0, 0.0, 2.0)
    lhs = np.concatenate([S, uncovered])[:m]
    rhs = np.concatenate([np.full(k, WHITNEY_UPPER), np.ones(k)])[:m]
    group = np.repeat(np.array(["upper", "cover"]), k)[:m]
    return {"lhs": lhs, "rhs": rhs, "group": group}


def _whitney_adjacent_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    k = rng.integers(1, 5, m)
    jg = rng.integers(1, 7, m)
    gamma = 2.0 ** -jg.astype(float)
    a1 = rng.uniform(0.0, 2.0 * math.pi, m)
    theta = rng.uniform(0.0, 1.0, m) * k * gamma
    a2 = np.mod(a1 + rng.choice(np.array([-1.0, 1.0]), m) * theta, 2.0 * math.pi)
    S = np.zeros(m)
    for kk in range(1, 5):
        for j in range(1, 7):
            sel = (k == kk) & (jg == j)
            if sel.any():
                S[sel] = whitney_adjacent_sum(a1[sel], a2[sel], 2.0 ** -j, kk)
    lhs = np.where(S >= 1.0, 0.0, 2.0)
    group = np.array([f"k={kk}" for kk in k])
    return {"lhs": lhs, "rhs": np.ones(m), "group": group}


def verify_whitney(cfg: VerifierConfig) -> LemmaResult:
    """Descomposición separada: suma en [1, 64]; variante k: χ_{θ≤kγ} dominada por la suma (k+2)γ."""
    separated = fixed_bound_check("whitney_separated", _whitney_separated_sampler, cfg)
    adjacent = fixed_bound_check("whitney_adjacent", _whitney_adjacent_sampler, cfg)
    return merge_results("whitney", [separated, adjacent])


# -----------------------------------------------------------------------------
# Inclusión K^±_{N,L,γ}(ω) ⊂ H_{max(L,Nγ²)}(ω)
# -----------------------------------------------------------------------------
def inclusion_defect(tau: np.ndarray, xi: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """|τ + ξ·ω|."""
    return np.abs(tau + np.sum(xi * omega, axis=-1))


def _inclusion_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    N = 2.0 ** rng.integers(0, 7, m)
    L = 2.0 ** rng.integers(0, 7, m)
    gamma = log_uniform(rng, 1e-3, math.pi, m)
    sign = rng.choice(np.array([-1.0, 1.0]), m)
    omega = unit_vectors(rng, m)
    # ⟨ξ⟩ ∈ [N, 2N) y ±ξ a ángulo ≤ γ de ω
    br = rng.uniform(N, 2.0 * N)
    r = np.sqrt(np.maximum(br ** 2 - 1.0, 0.0))
    theta = rng.uniform(-1.0, 1.0, m) * gamma
    c, s = np.cos(theta), np.sin(theta)
    direction = np.stack([c * omega[:, 0] - s * omega[:, 1], s * omega[:, 0] + c * omega[:, 1]], axis=-1)
    xi = (sign * r)[:, None] * direction
    # ⟨τ ± |ξ|⟩ ∈ [L, 2L)
    bh = rng.uniform(L, 2.0 * L)
    h = rng.choice(np.array([-1.0, 1.0]), m) * np.sqrt(np.maximum(bh ** 2 - 1.0, 0.0))
    tau = h - sign * r
    lhs = inclusion_defect(tau, xi, omega)
    rhs = INCLUSION_FACTOR * np.maximum(L, N * gamma ** 2)
    return {"lhs": lhs, "rhs": rhs, "group": np.where(L >= N * gamma ** 2, "L_dominant", "angle_dominant")}


@lru_cache(maxsize=1)
def inclusion_lattice() -> SpaceTimeGrid:
    return SpaceTimeGrid(Grid2D(2.0 * math.pi * 4.0, 64), T_win=16.0, nt=128)


@lru_cache(maxsize=32)
def _lattice_points(N: float, L: float, sign: int) -> Tuple[np.ndarray, np.ndarray]:
    """Puntos (τ, ξ) del soporte discreto K^±_{N,L}."""
    stg = inclusion_lattice()
    mask = WavePacket(N, L, sign).support_mask(stg)
    it, ix, iy = np.nonzero(mask)
    g = stg.grid
    xi = np.stack([g.kx[ix, iy], g.ky[ix, iy]], axis=-1)
    return stg.tau[it], xi


def _lattice_inclusion_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    lhs = np.full(m, np.nan)
    rhs = np.full(m, np.nan)
    N = 2.0 ** rng.integers(0, 3, m)
    L = 2.0 ** rng.integers(0, 3, m)
    sign = rng.choice(np.array([-1, 1]), m)
    gamma = log_uniform(rng, 0.05, math.pi, m)
    omega = unit_vectors(rng, m)
    for i in range(m):
        tau, xi = _lattice_points(float(N[i]), float(L[i]), int(sign[i]))
        if tau.size == 0:
            continue
        om = np.broadcast_to(omega[i], xi.shape)
        inside = direction_angle(sign[i] * xi, om) <= gamma[i] + ANGLE_TOL
        if not inside.any():
            continue
        lhs[i] = float(inclusion_defect(tau[inside], xi[inside], omega[i]).max())
        rhs[i] = INCLUSION_FACTOR * max(L[i], N[i] * gamma[i] ** 2)
    return {"lhs": lhs, "rhs": rhs}


def verify_set_inclusion(cfg: VerifierConfig) -> LemmaResult:
    """|τ + ξ·ω| ≤ 3 max(L, Nγ²) en K^±_{N,L,γ}(ω), continuo y en la retícula."""
    continuous = fixed_bound_check("set_inclusion_continuous", _inclusion_sampler, cfg)
    lattice = fixed_bound_check("set_inclusion_lattice", _lattice_inclusion_sampler, cfg)
    return merge_results("set_inclusion", [continuous, lattice])


# -----------------------------------------------------------------------------
# Sumas de sectores
# -----------------------------------------------------------------------------
SECTOR_GRID = Grid2D(2.0 * math.pi * 4.0, 32)


@lru_cache(maxsize=16)
def sector_membership(grid: Grid2D, gamma: float, sign: int = 1) -> np.ndarray:
    """Matriz (|Ω(γ)|, n²) de pertenencia ±ξ ∈ Γ_γ(ω); el modo cero no pertenece a ningún sector."""
    omegas = omega_family(gamma)
    xi = sign * np.stack([grid.kx.ravel(), grid.ky.ravel()], axis=-1)
    theta = direction_angle(xi[None, :, :], omegas[:, None, :])
    member = (theta <= gamma + ANGLE_TOL) & (grid.kabs.ravel() > 0)[None, :]
    member.setflags(write=False)
    return member


def sector_energies(grid: Grid2D, coeffs: np.ndarray, gamma: float, sign: int = 1) -> np.ndarray:
    """‖u^{γ,ω}‖² para cada ω ∈ Ω(γ)."""
    energy = np.abs(coeffs.reshape(-1)) ** 2
    return sector_membership(grid, gamma, sign).astype(float) @ energy


def sector_pair_sum(grid: Grid2D, c1: np.ndarray, c2: np.ndarray, gamma: float, signs=(1, 1)) -> float:
    """Σ_{θ(ω₁,ω₂) ≤ 2γ} ‖u₁^{γ,ω₁}‖‖u₂^{γ,ω₂}‖."""
    count, spacing = omega_spacing(gamma)
    a = np.sqrt(sector_energies(grid, c1, gamma, signs[0]))
    b = np.sqrt(sector_energies(grid, c2, gamma, signs[1]))
    j = np.arange(count)
    adjacent = _index_distance(j[:, None], j[None, :], count) * spacing <= SECTOR_ADJACENCY * gamma + ANGLE_TOL
    return float(a @ adjacent.astype(float) @ b)


def _sector_field(rng: np.random.Generator, grid: Grid2D) -> np.ndarray:
    """Coeficientes sin modo cero: ruido blanco, o concentrados en un rayo."""
    n = grid.n
    c = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if rng.random() < 0.3:
        e = unit_vectors(rng, 1)[0]
        theta = direction_angle(np.stack([grid.kx, grid.ky], axis=-1), np.broadcast_to(e, (n, n, 2)))
        c = c * (theta <= 0.05)
    c[0, 0] = 0.0
    return c


SECTOR_GAMMAS = tuple(math.pi / 2 ** j for j in range(0, 6))


def _sector_orthogonality_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    k = (m + 1) // 2
    ratio = np.full(k, np.nan)
    grid = SECTOR_GRID
    for i in range(k):
        gamma = SECTOR_GAMMAS[int(rng.integers(0, len(SECTOR_GAMMAS)))]
        sign = int(rng.choice([-1, 1]))
        c = _sector_field(rng, grid)
        total = float(np.sum(np.abs(c) ** 2))
        if total > 0:
            ratio[i] = float(sector_energies(grid, c, gamma, sign).sum()) / total
    lhs = np.concatenate([ratio, np.ones(k)])[:m]
    rhs = np.concatenate([np.full(k, SECTOR_OVERLAP), ratio])[:m]
    group = np.repeat(np.array(["upper", "lower"]), k)[:m]
    return {"lhs": lhs, "rhs": rhs, "group": group}


def _sector_sum_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    lhs = np.zeros(m)
    rhs = np.zeros(m)
    grid = SECTOR_GRID
    for i in range(m):
        gamma = SECTOR_GAMMAS[int(rng.integers(0, len(SECTOR_GAMMAS)))]
        signs = (int(rng.choice([-1, 1])), int(rng.choice([-1, 1])))
        c1 = _sector_field(rng, grid)
        c2 = _sector_field(rng, grid)
        lhs[i] = sector_pair_sum(grid, c1, c2, gamma, signs)
        rhs[i] = SECTOR_SUM_BOUND * math.sqrt(float(np.sum(np.abs(c1) ** 2)) * float(np.sum(np.abs(c2) ** 2)))
    return {"lhs": lhs, "rhs": rhs}


def verify_sector_sum(cfg: VerifierConfig) -> LemmaResult:
    """Σ_ω‖u^{γ,ω}‖²/‖u‖² ∈ [1, 3] y Σ_{adyacentes}‖u₁^{ω₁}‖‖u₂^{ω₂}‖ ≤ 15‖u₁‖‖u₂‖."""
    ortho = fixed_bound_check("sector_orthogonality", _sector_orthogonality_sampler, cfg)
    pairs = fixed_bound_check("sector_pair_sum", _sector_sum_sampler, cfg)
    return merge_results("sector_sum", [ortho, pairs])


COMBINATORIAL_CHECKS = {
    "hyperplane_count": verify_hyperplane_lemma,
    "whitney": verify_whitney,
    "set_inclusion": verify_set_inclusion,
    "sector_sum": verify_sector_sum,
}
