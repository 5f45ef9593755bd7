# solver/continuation.py
# -*- coding: utf-8 -*-
"""
Continuación global en dos niveles.

Nivel 1 (una etapa): T fijo resuelto de T^{1/2}[1 + D̃_T(0)] = ε/2; se
avanza por ventanas [kT, (k+1)T] mientras D̃_T(t) ≤ 2D̃_T(0) y hasta el
primer n con n·C·T^{1/2}·log(1/T) > D̃_T(0).

Nivel 2: se encadenan etapas re-resolviendo T_{j+1} en S_j; el puente entre
etapas usa la constante C de ‖f‖_(S) ≤ C‖f‖_(T) medida sobre los datos de
cada etapa (o la fijada en la configuración).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from solver.errors import NoAdmissibleTError
from solver.evolution import CoupledState, Trajectory, em_norm_report, solve_interval
from solver.initial_data import reconstruct_em, split_em
from solver.norms import magic_norm
from solver.spectral import forward, fourier_field
from utils.telemetry import log_event

# tolerancia relativa (a ε) de la ecuación de T
SOLVE_T_TOL = 1e-6
# T de una etapa no pasa de aquí
T_CAP = 0.5
# pares diádicos S = 2^-a < T = 2^-b para medir C
MAGIC_EXPONENTS = tuple(range(0, 9))


# -----------------------------------------------------------------------------
# Tipos
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class ScheduleSettings:
    dt: float = 1.0 / 256.0
    record_every: int = 1
    max_windows: int = 64
    max_stages: int = 8
    magic_constant: Optional[float] = None
    trend_fraction: float = 0.25


@dataclass
class GrowthCertificate:
    T: float
    D0: float
    sup: float
    C_fit: float

    @property
    def bound_ok(self) -> bool:
        return math.isfinite(self.C_fit)


@dataclass
class StageRecord:
    j: int
    S_start: float
    T: float
    n: int
    Delta: float
    D_start: float
    D_end: float
    C_fit: float
    doubling_ok: bool
    tripling_ok: bool
    residual: float
    final_state: Optional[CoupledState] = None
    series: List[Dict[str, float]] = field(default_factory=list)
    bridging_ok: Optional[bool] = None
    stop_rule_hit: bool = False
    T_capped: bool = False
    magic_C: Optional[float] = None


@dataclass
class SchedulerState:
    epsilon: float
    j: int = 0
    S: List[float] = field(default_factory=lambda: [0.0])
    T: List[float] = field(default_factory=list)
    Delta: List[float] = field(default_factory=list)
    n: List[int] = field(default_factory=list)
    norm_history: List[Dict[str, float]] = field(default_factory=list)
    C_growth: List[float] = field(default_factory=list)
    stages: List[StageRecord] = field(default_factory=list)
    trend_ok: Optional[bool] = None
    trend_min: Optional[float] = None

    def rows(self) -> List[Dict[str, object]]:
        """Filas de schedule.csv."""
        return [
            {
                "j": st.j,
                "S_j": st.S_start + st.Delta,
                "T_j": st.T,
                "n_j": st.n,
                "Delta_j": st.Delta,
                "Dtilde_start": st.D_start,
                "Dtilde_end": st.D_end,
                "C_fit": st.C_fit,
                "tripling_ok": st.tripling_ok,
                "bridging_ok": st.bridging_ok,
                "doubling_ok": st.doubling_ok,
                "residual": st.residual,
                "T_capped": st.T_capped,
                "magic_C": st.magic_C,
                "stop_rule_hit": st.stop_rule_hit,
            }
            for st in self.stages
        ]


# -----------------------------------------------------------------------------
# Tiempo local
# -----------------------------------------------------------------------------
def time_equation(epsilon: float, data_norm_fn: Callable[[float], float], T: float) -> float:
    """g(T) = T^{1/2}[1 + D̃_T(0)] − ε/2."""
    return math.sqrt(T) * (1.0 + data_norm_fn(T)) - 0.5 * epsilon


def solve_T(
    epsilon: float,
    data_norm_fn: Callable[[float], float],
    min_exponent: int = 60,
) -> float:
    """
    Barrido diádico T = 1, 1/2, 1/4, ... hasta el primer g(T) ≤ 0 y bisección
    en el intervalo [T_k, T_{k−1}]. Si g(1) ≤ 0 devuelve 1.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon debe ser positivo (epsilon={epsilon})")
    target = SOLVE_T_TOL * epsilon

    def g(T: float) -> float:
        return time_equation(epsilon, data_norm_fn, T)

    if g(1.0) <= 0.0:
        return 1.0
    hi = 1.0
    lo = None
    for k in range(1, min_exponent + 1):
        T = 2.0 ** -k
        if g(T) <= 0.0:
            lo = T
            break
        hi = T
    if lo is None:
        raise NoAdmissibleTError(
            f"g(T) > 0 en todo el barrido hasta T=2^-{min_exponent}; datos demasiado grandes"
        )
    g_lo = g(lo)
    if abs(g_lo) <= target:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        if abs(gm) <= target:
            return mid
        if gm <= 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return lo


# -----------------------------------------------------------------------------
# Certificado de crecimiento
# -----------------------------------------------------------------------------
def growth_certificate(series: Sequence[float], T: float) -> GrowthCertificate:
    """C_fit = [sup_t D̃_T(t) − D̃_T(0)] / (T^{1/2} log(1/T)) sobre una serie en [0, T]."""
    if not 0.0 < T < 1.0:
        raise ValueError(f"growth_certificate requiere 0 < T < 1 (T={T})")
    values = np.asarray(list(series), dtype=float)
    if values.size == 0:
        raise ValueError("serie vacía")
    D0 = float(values[0])
    sup = float(values.max())
    C = (sup - D0) / (math.sqrt(T) * math.log(1.0 / T))
    return GrowthCertificate(T=T, D0=D0, sup=sup, C_fit=max(C, 0.0))


def trajectory_certificate(traj: Trajectory, T: float) -> GrowthCertificate:
    return growth_certificate(traj.series("tildeD_T"), T)


def growth_sweep(
    initial: CoupledState,
    Ts: Sequence[float],
    dt: float,
    record_every: int = 1,
) -> List[GrowthCertificate]:
    """Modo barrido: C_fit(T) sobre una misma condición inicial."""
    out = []
    for T in Ts:
        traj = solve_interval(initial, T, min(dt, T), record_every, T_norm=T)
        out.append(trajectory_certificate(traj, T))
    return out


def sweep_stability(certs: Sequence[GrowthCertificate]) -> float:
    """max/min de C_fit sobre los valores positivos (1 si no hay dos)."""
    vals = [c.C_fit for c in certs if c.C_fit > 0]
    if len(vals) < 2:
        return 1.0
    return max(vals) / min(vals)


# -----------------------------------------------------------------------------
# Constante del puente
# -----------------------------------------------------------------------------
def magic_calibration(
    state: CoupledState,
    extra_T: Sequence[float] = (),
    exponents: Sequence[int] = MAGIC_EXPONENTS,
) -> float:
    """
    sup de ‖f‖_(S)/‖f‖_(T) sobre los pares S < T ≤ 1 tomados de los T diádicos
    2^-a y de `extra_T`, para las cuatro componentes ± de (E^df, B³) en
    `state`; nunca menor que 1 (caso S = T).
    """
    em = reconstruct_em(state.potential)
    split = split_em(em["Edf"], em["B3"], state.current, state.grid)
    g = state.grid
    Ts = sorted({2.0 ** -a for a in exponents} | {float(T) for T in extra_T if 0.0 < T <= 1.0})
    best = 1.0
    for part in (split.Edf_plus, split.Edf_minus, split.B3_plus, split.B3_minus):
        f = fourier_field(g, forward(g, part))
        norms = {T: magic_norm(f, T) for T in Ts}
        for S in Ts:
            for T in Ts:
                if S < T and norms[T] > 0:
                    best = max(best, norms[S] / norms[T])
    return best


# -----------------------------------------------------------------------------
# Etapas
# -----------------------------------------------------------------------------
def _dtilde_fn(state: CoupledState) -> Callable[[float], float]:
    cache: Dict[float, float] = {}

    def fn(T: float) -> float:
        if T not in cache:
            cache[T] = em_norm_report(state, T).tildeD_T
        return cache[T]

    return fn


def first_iteration(
    initial: CoupledState,
    epsilon: float,
    settings: ScheduleSettings,
    j: int = 1,
    t_limit: Optional[float] = None,
) -> StageRecord:
    S0 = initial.time
    fn = _dtilde_fn(initial)
    T_root = solve_T(epsilon, fn)
    T = min(T_root, T_CAP)
    # con T recortado (o g(1) ≤ 0) la ecuación de T no se cumple y el residuo no es ~0
    T_capped = T_root > T_CAP
    D0 = fn(T)
    residual = abs(time_equation(epsilon, fn, T)) / epsilon
    if T_capped:
        log_event("stage", "schedule", "flagged", t=S0, metrics={"j": j, "reason": "T_capped", "T_root": T_root})
    dt = min(settings.dt, T)
    log_weight = math.sqrt(T) * math.log(1.0 / T)

    state = initial
    series: List[Dict[str, float]] = []
    doubling_ok = True
    C_fit = 0.0
    n_stop = settings.max_windows
    stop_hit = False
    k = 0
    while k < n_stop:
        if t_limit is not None and state.time >= t_limit - 1e-12:
            break
        traj = solve_interval(state, T, dt, settings.record_every, T_norm=T)
        rows = traj.rows if not series else traj.rows[1:]
        series.extend(rows)
        state = traj.final
        k += 1
        if k == 1:
            C_fit = trajectory_certificate(traj, T).C_fit
            if C_fit > 0:
                n_need = int(math.floor(D0 / (C_fit * log_weight))) + 1
                if n_need < n_stop:
                    n_stop = n_need
                    stop_hit = True
        if any(r["tildeD_T"] > 2.0 * D0 * (1.0 + 1e-12) + 1e-300 for r in rows):
            doubling_ok = False
            log_event("stage", "schedule", "flagged", t=state.time, metrics={"j": j, "reason": "doubling"})
            break

    D_end = float(series[-1]["tildeD_T"]) if series else D0
    tripling_ok = D_end <= 3.0 * D0 * (1.0 + 1e-12) + 1e-300
    return StageRecord(
        j=j,
        S_start=S0,
        T=T,
        n=k,
        Delta=k * T,
        D_start=D0,
        D_end=D_end,
        C_fit=C_fit,
        doubling_ok=doubling_ok,
        tripling_ok=tripling_ok,
        residual=residual,
        final_state=state,
        series=series,
        stop_rule_hit=stop_hit,
        T_capped=T_capped,
    )


def global_schedule(
    initial: CoupledState,
    epsilon: float,
    t_max: float,
    settings: ScheduleSettings,
) -> SchedulerState:
    """Encadena etapas hasta t_max (o max_stages) y registra los puentes entre etapas."""
    if not math.isfinite(t_max) or t_max <= 0:
        raise ValueError(f"t_max debe ser finito y positivo (t_max={t_max})")
    sched = SchedulerState(epsilon=epsilon)
    state = initial
    S = 0.0
    prev: Optional[StageRecord] = None
    C: Optional[float] = None
    while S < t_max - 1e-12 and sched.j < settings.max_stages:
        j = sched.j + 1
        stage = first_iteration(state, epsilon, settings, j=j, t_limit=t_max)
        if stage.n == 0:
            break
        if settings.magic_constant is not None:
            C = settings.magic_constant
        else:
            C = max(C or 1.0, magic_calibration(state, (stage.T,) + ((prev.T,) if prev is not None else ())))
        stage.magic_C = C
        if prev is not None:
            stage.bridging_ok = stage.D_start <= 3.0 * C * prev.D_start * (1.0 + 1e-12) + 1e-300
        S = S + stage.Delta
        sched.j = j
        sched.S.append(S)
        sched.T.append(stage.T)
        sched.Delta.append(stage.Delta)
        sched.n.append(stage.n)
        sched.C_growth.append(stage.C_fit)
        sched.norm_history.append({"j": j, "S": S, "Dtilde_start": stage.D_start, "Dtilde_end": stage.D_end})
        sched.stages.append(stage)
        log_event(
            "stage",
            "schedule",
            "ok" if stage.tripling_ok and stage.doubling_ok else "flagged",
            t=S,
            metrics={"j": j, "T": stage.T, "n": stage.n, "Delta": stage.Delta, "C_fit": stage.C_fit},
        )
        state = stage.final_state
        prev = stage

    if sched.Delta:
        weighted = [d * (j + 1) for j, d in enumerate(sched.Delta, start=1)]
        sched.trend_min = min(weighted)
        sched.trend_ok = sched.trend_min >= settings.trend_fraction * weighted[0]
    return sched
