# solver/dirac.py
# -*- coding: utf-8 -*-
"""
Álgebra de Dirac 2×2 y geometría de interacciones bilineales.

Representación: α⁰ = I, α¹ = σ¹, α² = σ², β = σ³; métrica diag(−1, 1, 1).
Producto interno ⟨a, b⟩ = Σ a_i·conj(b_i).

Todas las funciones de símbolos están vectorizadas sobre el primer eje
(muestras), que es como las usa el verificador.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Tuple, Union

import numpy as np

from solver.errors import UndefinedDirectionError
from solver.spectral import ComplexField2D, Grid2D, as_fourier, direction_angle, FOURIER

IDENTITY = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
METRIC = np.array([-1.0, 1.0, 1.0])


@dataclass(frozen=True)
class DiracMatrices:
    alpha0: np.ndarray = IDENTITY
    alpha1: np.ndarray = SIGMA1
    alpha2: np.ndarray = SIGMA2
    beta: np.ndarray = SIGMA3

    @cached_property
    def alpha_upper(self) -> np.ndarray:
        """(α⁰, α¹, α²) apilados, forma (3, 2, 2)."""
        return np.stack([self.alpha0, self.alpha1, self.alpha2])

    @cached_property
    def alpha_lower(self) -> np.ndarray:
        """α_μ = g_{μν} α^ν."""
        return METRIC[:, None, None] * self.alpha_upper


DIRAC = DiracMatrices()

Sign = Union[int, np.ndarray]


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.sum(a * np.conj(b), axis=-1)


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("...ij,...j->...i", m, v)


def _unit(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    r = np.hypot(xi[..., 0], xi[..., 1])
    if np.any(r == 0):
        raise UndefinedDirectionError("dirección indefinida: vector nulo")
    return xi / r[..., None]


def projection_from_unit(e: np.ndarray) -> np.ndarray:
    """Π = ½(I + e₁σ¹ + e₂σ²) para vectores unitarios e (forma (..., 2))."""
    e = np.asarray(e, dtype=float)
    return 0.5 * (IDENTITY + e[..., 0, None, None] * SIGMA1 + e[..., 1, None, None] * SIGMA2)


def dirac_projection_symbol(xi: np.ndarray, sign: Sign = 1) -> np.ndarray:
    """Π(±ξ); error si ξ = 0."""
    s = np.asarray(sign)[..., None] if np.ndim(sign) else sign
    return projection_from_unit(s * _unit(xi))


# -----------------------------------------------------------------------------
# Proyecciones sobre campos espinoriales
# -----------------------------------------------------------------------------
def project_coeffs(grid: Grid2D, coeffs: np.ndarray, sign: int) -> np.ndarray:
    """
    Π(±D) sobre coeficientes de Fourier (2, n, n). En ξ = 0 se usa ½(I ± β),
    el límite ξ → 0 del proyector masivo; Π₊ + Π₋ = I y ambos son idempotentes.
    """
    r = grid.kabs
    safe = np.where(r > 0, r, 1.0)
    e1 = np.where(r > 0, grid.kx / safe, 0.0) * sign
    e2 = np.where(r > 0, grid.ky / safe, 0.0) * sign
    e3 = np.where(r > 0, 0.0, 1.0) * sign
    p0, p1 = coeffs[0], coeffs[1]
    out0 = 0.5 * ((1.0 + e3) * p0 + (e1 - 1j * e2) * p1)
    out1 = 0.5 * ((1.0 - e3) * p1 + (e1 + 1j * e2) * p0)
    return np.stack([out0, out1])


def apply_projection(psi: ComplexField2D, sign: int) -> ComplexField2D:
    f = as_fourier(psi)
    return f.with_samples(project_coeffs(f.grid, f.samples, sign), FOURIER)


# -----------------------------------------------------------------------------
# Ángulos y signos
# -----------------------------------------------------------------------------
def angle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(np.hypot(a[..., 0], a[..., 1]) == 0) or np.any(np.hypot(b[..., 0], b[..., 1]) == 0):
        raise UndefinedDirectionError("ángulo con un vector nulo")
    return direction_angle(a, b)


def classify_sign_pm12(xi1: np.ndarray, xi2: np.ndarray, pm1: Sign, pm2: Sign) -> np.ndarray:
    """Signo ±₁₂: tabla (+,+), (+,−) y su inversión para (−,−), (−,+)."""
    xi1 = np.asarray(xi1, dtype=float)
    xi2 = np.asarray(xi2, dtype=float)
    r1 = np.hypot(xi1[..., 0], xi1[..., 1])
    r2 = np.hypot(xi2[..., 0], xi2[..., 1])
    if np.any(r1 == 0) or np.any(r2 == 0):
        raise UndefinedDirectionError("±₁₂ requiere ξ₁, ξ₂ ≠ 0")
    pm1 = np.broadcast_to(np.asarray(pm1), r1.shape)
    pm2 = np.broadcast_to(np.asarray(pm2), r1.shape)
    # se reduce al caso ±₁ = + invirtiendo los tres signos
    flip = np.where(pm1 > 0, 1, -1)
    same = (pm1 * pm2) > 0
    base = np.where(same, np.where(r1 > r2, 1, -1), 1)
    return (flip * base).astype(int)


# -----------------------------------------------------------------------------
# Interacciones
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class BilinearInteraction:
    """X₀ = X₁ − X₂ con X_j = (τ_j, ξ_j); arrays con primer eje de muestras."""

    tau1: np.ndarray
    xi1: np.ndarray
    tau2: np.ndarray
    xi2: np.ndarray
    signs: Tuple[Sign, Sign, Sign] = (1, 1, 1)

    @property
    def tau0(self) -> np.ndarray:
        return np.asarray(self.tau1) - np.asarray(self.tau2)

    @property
    def xi0(self) -> np.ndarray:
        return np.asarray(self.xi1, dtype=float) - np.asarray(self.xi2, dtype=float)

    @cached_property
    def norms(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        f = lambda v: np.hypot(v[..., 0], v[..., 1])
        return f(self.xi0), f(np.asarray(self.xi1, float)), f(np.asarray(self.xi2, float))

    @cached_property
    def weights(self) -> np.ndarray:
        """h_j = τ_j ±_j |ξ_j|, forma (3, ...)."""
        r0, r1, r2 = self.norms
        s0, s1, s2 = self.signs
        return np.stack([self.tau0 + s0 * r0, np.asarray(self.tau1) + s1 * r1, np.asarray(self.tau2) + s2 * r2])

    @property
    def hmax(self) -> np.ndarray:
        return np.max(np.abs(self.weights), axis=0)

    def _signed(self, j: int) -> np.ndarray:
        v = (self.xi0, np.asarray(self.xi1, float), np.asarray(self.xi2, float))[j]
        s = np.asarray(self.signs[j])
        return (s[..., None] if s.ndim else s) * v

    @cached_property
    def theta12(self) -> np.ndarray:
        return angle(self._signed(1), self._signed(2))

    @cached_property
    def theta0(self) -> Tuple[np.ndarray, np.ndarray]:
        """(θ₀₁, θ₀₂); NaN donde ξ₀ = 0."""
        x0 = self._signed(0)
        degenerate = self.norms[0] == 0
        x0 = np.where(degenerate[..., None], 1.0, x0)
        t01 = np.where(degenerate, np.nan, direction_angle(x0, self._signed(1)))
        t02 = np.where(degenerate, np.nan, direction_angle(x0, self._signed(2)))
        return t01, t02

    @cached_property
    def pm12(self) -> np.ndarray:
        return classify_sign_pm12(self.xi1, self.xi2, self.signs[1], self.signs[2])


@dataclass(frozen=True)
class QuadInteraction:
    """Direcciones e (4, m, 2) y espinores z (4, m, 2), todos unitarios."""

    e: np.ndarray
    z: np.ndarray

    @cached_property
    def thetas(self) -> dict:
        e = self.e
        pairs = {"12": (0, 1), "34": (2, 3), "13": (0, 2), "14": (0, 3), "23": (1, 2), "24": (1, 3)}
        return {k: direction_angle(e[a], e[b]) for k, (a, b) in pairs.items()}

    @property
    def phi(self) -> np.ndarray:
        t = self.thetas
        return np.minimum(np.minimum(t["13"], t["14"]), np.minimum(t["23"], t["24"]))


# -----------------------------------------------------------------------------
# Símbolos nulos
# -----------------------------------------------------------------------------
def _bilinear_terms(P1: np.ndarray, z1: np.ndarray, P2: np.ndarray, z2: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """⟨α Π₁z₁, Π₂z₂⟩ para cada α de la pila `alphas`; forma (len(alphas), ...)."""
    w1 = matvec(P1, z1)
    w2 = matvec(P2, z2)
    return np.stack([inner(matvec(a, w1), w2) for a in alphas])


def q1234_symbol(q: QuadInteraction) -> np.ndarray:
    P = projection_from_unit(q.e)
    b12 = _bilinear_terms(P[0], q.z[0], P[1], q.z[1], DIRAC.alpha_upper)
    b34 = _bilinear_terms(P[2], q.z[2], P[3], q.z[3], DIRAC.alpha_upper)
    return -b12[0] * b34[0] + b12[1] * b34[1] + b12[2] * b34[2]


def q1234_explicit(q: QuadInteraction) -> np.ndarray:
    """Misma cantidad por contracción α^μ ⊗ α_μ con índices bajados explícitamente."""
    P = projection_from_unit(q.e)
    up = _bilinear_terms(P[0], q.z[0], P[1], q.z[1], DIRAC.alpha_upper)
    low = _bilinear_terms(P[2], q.z[2], P[3], q.z[3], DIRAC.alpha_lower)
    return np.einsum("m...,m...->...", up, low)


def null_bound_q1234(q: QuadInteraction) -> np.ndarray:
    """θ₁₂θ₃₄ + φ·max(θ₁₂, θ₃₄) + φ²."""
    t = q.thetas
    phi = q.phi
    return t["12"] * t["34"] + phi * np.maximum(t["12"], t["34"]) + phi ** 2


def null_bound_regime(q: QuadInteraction) -> np.ndarray:
    """Cota θ₁₃θ₂₄ del régimen min(θ₁₂, θ₃₄) ≪ φ."""
    t = q.thetas
    return t["13"] * t["24"]


def sigma_trilinear_symbol(
    xi1: np.ndarray,
    xi2: np.ndarray,
    signs: Tuple[Sign, Sign],
    z1: np.ndarray,
    z2: np.ndarray,
    g: np.ndarray,
) -> np.ndarray:
    """Σ_j σ^j g_j con σ^j = ⟨α^jΠ(±₁ξ₁)z₁, Π(±₂ξ₂)z₂⟩, j = 1, 2."""
    P1 = dirac_projection_symbol(xi1, signs[0])
    P2 = dirac_projection_symbol(xi2, signs[1])
    s = _bilinear_terms(P1, z1, P2, z2, DIRAC.alpha_upper[1:])
    g = np.asarray(g)
    return s[0] * g[..., 0] + s[1] * g[..., 1]


def sigma_kl_symbol(
    kind: str,
    X1: np.ndarray,
    X2: np.ndarray,
    signs: Tuple[Sign, Sign],
    z1: np.ndarray,
    z2: np.ndarray,
    indices: Tuple[int, int],
) -> np.ndarray:
    """
    σ_κλ = X₀^κ⟨α_λΠz₁, Πz₂⟩ − X₀^λ⟨α_κΠz₁, Πz₂⟩, X₀ = X₁ − X₂, X = (τ, ξ¹, ξ²).
    kind "kl": κ, λ ∈ {1, 2}; kind "k0": λ = 0.
    """
    k, l = indices
    if kind == "kl" and not (k in (1, 2) and l in (1, 2)):
        raise ValueError("kind='kl' requiere índices espaciales")
    if kind == "k0" and not (k in (1, 2) and l == 0):
        raise ValueError("kind='k0' requiere (k, 0) con k espacial")
    if kind not in ("kl", "k0"):
        raise ValueError(f"kind desconocido: {kind!r}")
    X1 = np.asarray(X1, dtype=float)
    X2 = np.asarray(X2, dtype=float)
    X0 = X1 - X2
    P1 = dirac_projection_symbol(X1[..., 1:], signs[0])
    P2 = dirac_projection_symbol(X2[..., 1:], signs[1])
    b = _bilinear_terms(P1, z1, P2, z2, DIRAC.alpha_lower)
    return X0[..., k] * b[l] - X0[..., l] * b[k]


def sigma_kl_bound(kind: str, inter: BilinearInteraction) -> np.ndarray:
    """Cota nula de σ_kl (|ξ₀|θ₁₂ + |ξ₀|min θ₀ⱼ) y de σ_k0 (añade |h₀|)."""
    r0 = inter.norms[0]
    t01, t02 = inter.theta0
    base = r0 * inter.theta12 + r0 * np.nan_to_num(np.minimum(t01, t02))
    if kind == "k0":
        return base + np.abs(inter.weights[0])
    return base


# -----------------------------------------------------------------------------
# Lema de ángulos y lemas de signo
# -----------------------------------------------------------------------------
# |ξ₀| ≤ SMALL_XI0·min(|ξ₁|, |ξ₂|) con ±₁ ≠ ±₂ activa la rama θ₁₂ ∼ 1
SMALL_XI0 = 0.25


@dataclass(frozen=True)
class AnglesBounds:
    hmax: np.ndarray
    basic: np.ndarray            # min(|ξ₁|,|ξ₂|)θ₁₂²
    opposite_branch: np.ndarray  # bool: |ξ₀| ≪ |ξ₁|∼|ξ₂| y ±₁ ≠ ±₂
    branch: np.ndarray           # min|ξ| en esa rama, |ξ₁||ξ₂|θ₁₂²/|ξ₀| en la otra
    f4: np.ndarray               # |ξ₀| min(θ₀₁, θ₀₂)²
    f2: np.ndarray               # |ξ₀| donde ±₀ ≠ ±₁₂, NaN si no aplica
    f1_ratio: np.ndarray         # min θ₀ⱼ / (min|ξ| sinθ₁₂/|ξ₀|), ±₀ = ±₁₂
    f1_max_ratio: np.ndarray     # max θ₀ⱼ / θ₁₂, ±₀ = ±₁₂ y ±₁ ≠ ±₂
    f3: np.ndarray               # |ξ₁||ξ₂|θ₁₂²/|ξ₀|, ±₀ = ±₁₂ y ±₁ = ±₂
    f3_ratio: np.ndarray         # f3 / (min|ξ| max θ₀ⱼ²)
    degenerate: np.ndarray       # ξ₀ = 0


def angles_lemma_bound(inter: BilinearInteraction) -> AnglesBounds:
    r0, r1, r2 = inter.norms
    if np.any(r1 == 0) or np.any(r2 == 0):
        raise UndefinedDirectionError("el lema de ángulos requiere ξ₁, ξ₂ ≠ 0")
    t12 = inter.theta12
    t01, t02 = inter.theta0
    degenerate = r0 == 0
    rmin12 = np.minimum(r1, r2)
    s0, s1, s2 = (np.broadcast_to(np.asarray(s), r0.shape) for s in inter.signs)
    pm12 = inter.pm12
    same0 = s0 == pm12
    safe_r0 = np.where(degenerate, np.nan, r0)

    with np.errstate(divide="ignore", invalid="ignore"):
        opposite = (s1 != s2) & (r0 <= SMALL_XI0 * rmin12)
        branch = np.where(opposite, rmin12, r1 * r2 * t12 ** 2 / safe_r0)
        tmin = np.minimum(t01, t02)
        tmax = np.maximum(t01, t02)
        f4 = safe_r0 * tmin ** 2
        f2 = np.where(~same0, safe_r0, np.nan)
        denom1 = rmin12 * np.sin(t12) / safe_r0
        f1 = np.where(same0 & (denom1 > 1e-9), tmin / denom1, np.nan)
        f1max = np.where(same0 & (s1 != s2) & (t12 > 1e-9), tmax / t12, np.nan)
        f3 = np.where(same0 & (s1 == s2), r1 * r2 * t12 ** 2 / safe_r0, np.nan)
        denom3 = np.minimum(safe_r0, rmin12) * tmax ** 2
        f3r = np.where(same0 & (s1 == s2) & (denom3 > 1e-12), f3 / denom3, np.nan)

    return AnglesBounds(
        hmax=inter.hmax,
        basic=rmin12 * t12 ** 2,
        opposite_branch=opposite,
        branch=branch,
        f4=f4,
        f2=f2,
        f1_ratio=f1,
        f1_max_ratio=f1max,
        f3=f3,
        f3_ratio=f3r,
        degenerate=degenerate,
    )
