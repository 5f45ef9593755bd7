# checks/symbols.py
# -*- coding: utf-8 -*-
"""
Comprobaciones de símbolos: álgebra de proyecciones, estructura nula de
q₁₂₃₄, σ^j y σ_κλ, lema de ángulos, lemas de signo e identidad de la
divergencia de los datos del potencial.

Cada función devuelve un LemmaResult; las muestras se estratifican para
cubrir el peor caso (direcciones agrupadas, espinores alineados con el
rango de Π y pesos hiperbólicos equilibrados).
"""
from __future__ import annotations

import math
from typing import Dict, Tuple

import numpy as np

from checks.sampling import (
    LemmaResult,
    VerifierConfig,
    calibrate_then_assert,
    fixed_bound_check,
    log_uniform,
    merge_results,
    unit_spinors,
    unit_vectors,
)
from solver.dirac import (
    IDENTITY,
    BilinearInteraction,
    QuadInteraction,
    angles_lemma_bound,
    dirac_projection_symbol,
    matvec,
    null_bound_q1234,
    null_bound_regime,
    projection_from_unit,
    q1234_explicit,
    q1234_symbol,
    sigma_kl_bound,
    sigma_kl_symbol,
    sigma_trilinear_symbol,
)
from solver.initial_data import charge_density_coeffs, make_data, potential_data
from solver.spectral import Grid2D, forward

PROJECTION_TOL = 1e-12
IDENTITY_TOL = 1e-10
# min(θ₁₂, θ₃₄) ≤ REGIME_FACTOR·φ define el régimen de la cota θ₁₃θ₂₄
REGIME_FACTOR = 0.125


# -----------------------------------------------------------------------------
# Generadores
# -----------------------------------------------------------------------------
def _rotate(e: np.ndarray, angle: np.ndarray) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.stack([c * e[..., 0] - s * e[..., 1], s * e[..., 0] + c * e[..., 1]], axis=-1)


def _signs(rng: np.random.Generator, m: int) -> np.ndarray:
    return rng.choice(np.array([-1, 1]), size=m)


def aligned_spinors(rng: np.random.Generator, e: np.ndarray) -> np.ndarray:
    """z ∈ rango Π(e), normalizado (caso extremo de los símbolos nulos)."""
    w = unit_spinors(rng, e.shape[0])
    z = matvec(projection_from_unit(e), w)
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    z = np.where(norm > 1e-8, z / np.where(norm > 1e-8, norm, 1.0), w)
    return z


def _mixed_spinors(rng: np.random.Generator, e: np.ndarray) -> np.ndarray:
    """Mitad alineados, mitad aleatorios."""
    m = e.shape[0]
    aligned = aligned_spinors(rng, e)
    free = unit_spinors(rng, m)
    pick = rng.random(m) < 0.5
    return np.where(pick[:, None], aligned, free)


def quad_interactions(rng: np.random.Generator, m: int, regime: bool = False) -> QuadInteraction:
    """
    e₁..e₄ agrupados: e₂ a escala θ₁₂ de e₁, e₃ a escala φ de e₁ y e₄ a escala
    θ₃₄ de e₃, con escalas log-uniformes en [1e-4, π]. Un octavo de las
    muestras usa direcciones independientes.
    """
    base = unit_vectors(rng, m)
    s12 = log_uniform(rng, 1e-4, math.pi, m)
    s34 = log_uniform(rng, 1e-4, math.pi, m)
    sphi = log_uniform(rng, 1e-4, math.pi, m)
    if regime:
        s12 = np.minimum(s12, sphi * log_uniform(rng, 1e-3, REGIME_FACTOR, m))
    jitter = lambda: rng.choice(np.array([-1.0, 1.0]), m) * rng.uniform(0.5, 1.0, m)
    e1 = base
    e2 = _rotate(base, s12 * jitter())
    e3 = _rotate(base, sphi * jitter())
    e4 = _rotate(e3, s34 * jitter())
    if not regime:
        free = rng.random(m) < 0.125
        e = np.stack([e1, e2, e3, e4])
        rand = np.stack([unit_vectors(rng, m) for _ in range(4)])
        e = np.where(free[None, :, None], rand, e)
    else:
        e = np.stack([e1, e2, e3, e4])
    z = np.stack([_mixed_spinors(rng, e[j]) for j in range(4)])
    return QuadInteraction(e=e, z=z)


def bilinear_interactions(
    rng: np.random.Generator,
    m: int,
    r_range: Tuple[float, float] = (0.1, 10.0),
) -> BilinearInteraction:
    """
    Interacciones X₀ = X₁ − X₂ con signos aleatorios. ξ₂ es ξ₁ girado a una
    escala log-uniforme y reescalado; en la mitad de las muestras los pesos
    son equilibrados (|h₀| = |h₁| = |h₂| = |Δ|/3), el resto con h_j
    log-uniformes de signo aleatorio.
    """
    r1 = log_uniform(rng, *r_range, m)
    r2 = r1 * log_uniform(rng, 1e-2, 1e2, m)
    r2 = np.clip(r2, r_range[0], r_range[1])
    e1 = unit_vectors(rng, m)
    rot = rng.choice(np.array([-1.0, 1.0]), m) * log_uniform(rng, 1e-5, math.pi, m)
    flip = rng.random(m) < 0.25
    rot = np.where(flip, math.pi - rot, rot)
    xi1 = r1[:, None] * e1
    xi2 = r2[:, None] * _rotate(e1, rot)
    s0, s1, s2 = _signs(rng, m), _signs(rng, m), _signs(rng, m)
    xi0 = xi1 - xi2
    n0 = np.hypot(xi0[:, 0], xi0[:, 1])
    delta = s0 * n0 - s1 * r1 + s2 * r2
    balanced = rng.random(m) < 0.5
    h1 = np.where(balanced, -delta / 3.0, rng.choice(np.array([-1.0, 1.0]), m) * log_uniform(rng, 1e-6, 1e2, m))
    h2 = np.where(balanced, delta / 3.0, rng.choice(np.array([-1.0, 1.0]), m) * log_uniform(rng, 1e-6, 1e2, m))
    tau1 = h1 - s1 * r1
    tau2 = h2 - s2 * r2
    return BilinearInteraction(tau1=tau1, xi1=xi1, tau2=tau2, xi2=xi2, signs=(s0, s1, s2))


# -----------------------------------------------------------------------------
# Álgebra de proyecciones
# -----------------------------------------------------------------------------
def _projection_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    xi = log_uniform(rng, 1e-6, 1e6, m)[:, None] * unit_vectors(rng, m)
    P = dirac_projection_symbol(xi, 1)
    Q = dirac_projection_symbol(xi, -1)
    herm = lambda A: np.conj(np.swapaxes(A, -1, -2))
    errs = [
        np.abs(P @ P - P),
        np.abs(P - herm(P)),
        np.abs(P @ Q),
        np.abs(P + Q - IDENTITY),
    ]
    err = np.max(np.stack([e.reshape(m, -1).max(axis=1) for e in errs]), axis=0)
    return {"lhs": err, "rhs": np.full(m, PROJECTION_TOL)}


def verify_projection_algebra(cfg: VerifierConfig) -> LemmaResult:
    """Π² = Π, Π* = Π, Π₊Π₋ = 0, Π₊ + Π₋ = I hasta 1e-12."""
    return fixed_bound_check("projection_algebra", _projection_sampler, cfg)


# -----------------------------------------------------------------------------
# q₁₂₃₄
# -----------------------------------------------------------------------------
def _phi_regime(q: QuadInteraction) -> np.ndarray:
    t = q.thetas
    lo = np.minimum(t["12"], t["34"])
    hi = np.maximum(t["12"], t["34"])
    phi = q.phi
    return np.where(phi <= lo, "phi_below_min", np.where(phi <= hi, "phi_between", "phi_above_max"))


def _quad_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    q = quad_interactions(rng, m)
    return {"lhs": np.abs(q1234_symbol(q)), "rhs": null_bound_q1234(q), "group": _phi_regime(q)}


def _quad_regime_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    q = quad_interactions(rng, m, regime=True)
    t = q.thetas
    inside = np.minimum(t["12"], t["34"]) <= REGIME_FACTOR * q.phi
    rhs = np.where(inside, null_bound_regime(q), np.nan)
    return {"lhs": np.abs(q1234_symbol(q)), "rhs": rhs, "group": np.where(inside, "regime", "outside")}


def _quad_contraction_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    q = quad_interactions(rng, m)
    diff = np.abs(q1234_symbol(q) - q1234_explicit(q))
    return {"lhs": diff, "rhs": np.full(m, PROJECTION_TOL)}


def verify_null_quadrilinear(cfg: VerifierConfig) -> LemmaResult:
    """|q₁₂₃₄| ≤ C(θ₁₂θ₃₄ + φ·max(θ₁₂, θ₃₄) + φ²), con la contracción comprobada dos veces."""
    main = calibrate_then_assert("null_quadrilinear", _quad_sampler, cfg)
    contraction = fixed_bound_check("metric_contraction", _quad_contraction_sampler, cfg)
    return merge_results("null_quadrilinear", [main, contraction])


def verify_null_quadrilinear_regime(cfg: VerifierConfig) -> LemmaResult:
    """|q₁₂₃₄| ≤ Cθ₁₃θ₂₄ cuando min(θ₁₂, θ₃₄) ≪ φ."""
    return calibrate_then_assert("null_quadrilinear_regime", _quad_regime_sampler, cfg)


# -----------------------------------------------------------------------------
# σ^j g_j
# -----------------------------------------------------------------------------
def _trilinear_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    inter = bilinear_interactions(rng, m)
    s0, s1, s2 = inter.signs
    xi1 = np.asarray(inter.xi1)
    xi2 = np.asarray(inter.xi2)
    z1 = _mixed_spinors(rng, s1[:, None] * xi1 / np.linalg.norm(xi1, axis=-1, keepdims=True))
    z2 = _mixed_spinors(rng, s2[:, None] * xi2 / np.linalg.norm(xi2, axis=-1, keepdims=True))

    xi0 = inter.xi0
    r0 = inter.norms[0]
    degenerate = r0 == 0
    e0 = xi0 / np.where(degenerate, 1.0, r0)[:, None]
    perp = np.stack([-e0[:, 1], e0[:, 0]], axis=-1)
    # g casi transversal a ξ₀ salvo una componente longitudinal de escala variable
    amp_perp = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    amp_par = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) * log_uniform(rng, 1e-6, 1.0, m)
    g = amp_perp[:, None] * perp + amp_par[:, None] * e0

    lhs = np.abs(sigma_trilinear_symbol(xi1, xi2, (s1, s2), z1, z2, g))
    t01, t02 = inter.theta0
    gnorm = np.sqrt(np.sum(np.abs(g) ** 2, axis=-1))
    longitudinal = np.abs(e0[:, 0] * g[:, 0] + e0[:, 1] * g[:, 1])
    rhs = (inter.theta12 + np.minimum(t01, t02)) * gnorm + longitudinal
    rhs = np.where(degenerate, np.nan, rhs)
    return {"lhs": lhs, "rhs": rhs}


def verify_trilinear_null(cfg: VerifierConfig) -> LemmaResult:
    """|σ^j g_j| ≤ C[(θ₁₂ + min θ₀ⱼ)|g| + |ξ̂₀·g|]."""
    return calibrate_then_assert("trilinear_null", _trilinear_sampler, cfg)


# -----------------------------------------------------------------------------
# σ_κλ
# -----------------------------------------------------------------------------
def _sigma_sampler(kind: str):
    def sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
        inter = bilinear_interactions(rng, m)
        s0, s1, s2 = inter.signs
        X1 = np.concatenate([np.asarray(inter.tau1)[:, None], inter.xi1], axis=-1)
        X2 = np.concatenate([np.asarray(inter.tau2)[:, None], inter.xi2], axis=-1)
        r0, r1, r2 = inter.norms
        z1 = _mixed_spinors(rng, s1[:, None] * np.asarray(inter.xi1) / r1[:, None])
        z2 = _mixed_spinors(rng, s2[:, None] * np.asarray(inter.xi2) / r2[:, None])
        k = int(rng.integers(1, 3))
        indices = (k, 3 - k) if kind == "kl" else (k, 0)
        lhs = np.abs(sigma_kl_symbol(kind, X1, X2, (s1, s2), z1, z2, indices))
        rhs = sigma_kl_bound(kind, inter)
        rhs = np.where(inter.norms[0] == 0, np.nan, rhs)
        return {"lhs": lhs, "rhs": rhs, "group": np.full(m, f"{kind}:{indices[0]}{indices[1]}")}

    return sampler


def verify_sigma_null(cfg: VerifierConfig) -> LemmaResult:
    """|σ_kl| ≲ |ξ₀|(θ₁₂ + min θ₀ⱼ) y |σ_k0| añade |τ₀ ±₀ |ξ₀||."""
    parts = [calibrate_then_assert(f"sigma_{kind}", _sigma_sampler(kind), cfg) for kind in ("kl", "k0")]
    return merge_results("sigma_null", parts)


# -----------------------------------------------------------------------------
# Lema de ángulos y lemas de signo
# -----------------------------------------------------------------------------
def _angles_sampler(part: str):
    def sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
        inter = bilinear_interactions(rng, m)
        b = angles_lemma_bound(inter)
        nan = np.full(m, np.nan)
        one = np.ones(m)
        if part == "basic":
            return {"lhs": b.basic, "rhs": b.hmax}
        if part == "branch":
            group = np.where(b.opposite_branch, "opposite", "general")
            return {"lhs": np.where(b.degenerate, nan, b.branch), "rhs": b.hmax, "group": group}
        if part == "opposite":
            return {"lhs": one, "rhs": np.where(b.opposite_branch, inter.theta12, nan)}
        if part == "sign_gap":
            return {"lhs": b.f2, "rhs": np.where(np.isfinite(b.f2), b.hmax, nan)}
        if part == "output_angle":
            return {"lhs": np.where(b.degenerate, nan, b.f4), "rhs": b.hmax}
        raise ValueError(f"parte desconocida: {part!r}")

    return sampler


def verify_angles(cfg: VerifierConfig) -> LemmaResult:
    """max|h_j| ≳ min|ξ|θ₁₂² y la dicotomía de ramas (θ₁₂ ∼ 1 o |ξ₁||ξ₂|θ₁₂²/|ξ₀|)."""
    parts = [
        calibrate_then_assert("angles_basic", _angles_sampler("basic"), cfg),
        calibrate_then_assert("angles_branch", _angles_sampler("branch"), cfg),
        calibrate_then_assert("angles_opposite", _angles_sampler("opposite"), cfg),
    ]
    return merge_results("angles", parts)


def verify_sign_gap(cfg: VerifierConfig) -> LemmaResult:
    """±₀ ≠ ±₁₂ ⇒ max|h_j| ≳ |ξ₀|."""
    return calibrate_then_assert("sign_gap", _angles_sampler("sign_gap"), cfg)


def verify_output_angle(cfg: VerifierConfig) -> LemmaResult:
    """max|h_j| ≳ |ξ₀| min(θ₀₁, θ₀₂)² para todos los signos."""
    return calibrate_then_assert("output_angle", _angles_sampler("output_angle"), cfg)


def _comparability_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    # cuatro cocientes por interacción: min θ₀ⱼ y max θ₀ⱼ en ambos sentidos
    k = max(1, m // 4)
    inter = bilinear_interactions(rng, k)
    b = angles_lemma_bound(inter)
    one = np.ones(k)
    lhs = np.concatenate([b.f1_ratio, one, b.f1_max_ratio, one])
    rhs = np.concatenate([one, b.f1_ratio, one, b.f1_max_ratio])
    group = np.repeat(np.array(["min_upper", "min_lower", "max_upper", "max_lower"]), k)
    return {"lhs": lhs[:m], "rhs": rhs[:m], "group": group[:m]}


def _same_sign_sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
    k = max(1, m // 3)
    inter = bilinear_interactions(rng, k)
    b = angles_lemma_bound(inter)
    one = np.ones(k)
    lhs = np.concatenate([b.f3, b.f3_ratio, one])
    rhs = np.concatenate([b.hmax, one, b.f3_ratio])
    group = np.repeat(np.array(["vs_weight", "upper", "lower"]), k)
    return {"lhs": lhs[:m], "rhs": rhs[:m], "group": group[:m]}


def verify_angle_comparability(cfg: VerifierConfig) -> LemmaResult:
    """±₀ = ±₁₂: min θ₀ⱼ ∼ min|ξ| sinθ₁₂/|ξ₀|; con ±₁ ≠ ±₂ además max θ₀ⱼ ∼ θ₁₂."""
    return calibrate_then_assert("angle_comparability", _comparability_sampler, cfg)


def verify_same_sign_angles(cfg: VerifierConfig) -> LemmaResult:
    """±₀ = ±₁₂, ±₁ = ±₂: |ξ₁||ξ₂|θ₁₂²/|ξ₀| ∼ min|ξ_j| max θ₀ⱼ² ≲ max|h_j|."""
    return calibrate_then_assert("same_sign_angles", _same_sign_sampler, cfg)


# -----------------------------------------------------------------------------
# Identidad de divergencia de los datos del potencial
# -----------------------------------------------------------------------------
def potential_identity_error(grid: Grid2D, seed: int) -> Tuple[float, float]:
    """
    Error máximo de ξ·g^± = ∓½|ξ|^{−1/2}ρ̂ con
    g^± = |ξ|^{1/2}(â/2 ± iȧ̂/(2|ξ|)), fuera de ξ=0 y de Nyquist.
    Devuelve (error, escala = max|ρ̂|).
    """
    spec = {
        "psi": {"profile": "random-band", "amplitude": 0.5, "band": [grid.k_min, 6.0 * grid.k_min]},
        "E": {"profile": "random-band", "amplitude": 0.3, "band": [grid.k_min, 6.0 * grid.k_min]},
        "B": {"profile": "random-band", "amplitude": 0.3, "band": [grid.k_min, 6.0 * grid.k_min]},
    }
    data = make_data(grid, spec, seed=seed)
    pot = potential_data(data)
    a = forward(grid, pot.A[1:])
    at = forward(grid, pot.At[1:])
    k = grid.kabs
    valid = (k > 0) & ~grid.nyquist_mask
    safe = np.where(valid, k, 1.0)
    rho = charge_density_coeffs(grid, data.psi0)
    err = 0.0
    for sign in (1.0, -1.0):
        g = np.sqrt(safe) * (0.5 * a + sign * 0.5j * at / safe)
        lhs = grid.kx * g[0] + grid.ky * g[1]
        rhs = -sign * 0.5 * rho / np.sqrt(safe)
        err = max(err, float(np.max(np.abs(lhs - rhs)[valid])))
    return err, float(np.max(np.abs(rho)))


def _potential_sampler(grid: Grid2D):
    def sampler(rng: np.random.Generator, m: int) -> Dict[str, np.ndarray]:
        lhs = np.empty(m)
        rhs = np.empty(m)
        for i in range(m):
            err, scale = potential_identity_error(grid, int(rng.integers(0, 2 ** 31)))
            lhs[i] = err
            rhs[i] = IDENTITY_TOL * max(1.0, scale)
        return {"lhs": lhs, "rhs": rhs}

    return sampler


def verify_potential_identity(cfg: VerifierConfig, grid: Grid2D) -> LemmaResult:
    return fixed_bound_check("potential_identity", _potential_sampler(grid), cfg)


def verify_null_symbols(cfg: VerifierConfig) -> LemmaResult:
    """Estructura nula: q_{1234} (con y sin regímenes), símbolo trilineal y σ_{κλ}."""
    parts = [
        verify_null_quadrilinear(cfg),
        verify_null_quadrilinear_regime(cfg),
        verify_trilinear_null(cfg),
        verify_sigma_null(cfg),
    ]
    return merge_results("null_symbols", parts)


SYMBOL_CHECKS = {
    "projection_algebra": verify_projection_algebra,
    "null_symbols": verify_null_symbols,
    "angles": verify_angles,
    "sign_gap": verify_sign_gap,
    "angle_comparability": verify_angle_comparability,
    "same_sign_angles": verify_same_sign_angles,
    "output_angle": verify_output_angle,
}
