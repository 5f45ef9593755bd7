# tools/md2d.py
# -*- coding: utf-8 -*-
"""
Línea de comandos del laboratorio Maxwell–Dirac 2d.

  simulate     integra [0, T] y escribe diagnostics.csv, norms.json, espectros
  schedule     continuación global en etapas → schedule.csv
  verify       verificador de lemas → <lema>.csv + summary.json
  plotdata     CSV largos (quantity, t, value) a partir de un directorio de ejecución
  sweep-eps    una fila de schedule por ε → sweep_eps.csv
  growth-sweep C_fit(T) en T diádicos y múltiplos de amplitud → growth.csv

Códigos de salida: 0 ok, 1 configuración, 2 numérico, 3 E/S, 4 lema fallido.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

import pandas as pd

from checks.runner import raise_on_failure, resolve_lemmas, run_verifier
from checks.sampling import VerifierConfig
from solver.continuation import ScheduleSettings, global_schedule, growth_sweep, sweep_stability
from solver.errors import BlowUpError, LemmaFailure, NoAdmissibleTError
from solver.evolution import CoupledState, em_norm_report, initial_state, picard_iterate, solve_interval
from solver.initial_data import ChargeClassData, besov_data_check, make_data
from solver.spectral import Grid2D, fourier_field, forward, physical_field, shell_norms
from utils.artifacts import (
    ArtifactError,
    ensure_dir,
    long_format,
    read_csv,
    write_csv,
    write_field,
    write_figure,
    write_json,
)
from utils.config import ConfigError, RunConfig, load_config, with_overrides
from utils.telemetry import log_event

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICS = 2
EXIT_IO = 3
EXIT_LEMMA = 4

DEFAULT_EPSILONS = (0.05, 0.1, 0.2, 0.4)
GROWTH_TS = tuple(2.0 ** -k for k in range(3, 7))
GROWTH_AMPLITUDES = (1.0, 2.0)
PICARD_ITERATES = 5
CONTRACTION_LIMIT = 0.5

OK = "✅"
FAIL = "❌"
INFO = "ℹ️ "


# -----------------------------------------------------------------------------
# Construcción a partir de RunConfig
# -----------------------------------------------------------------------------
def build_grid(cfg: RunConfig) -> Grid2D:
    return Grid2D(cfg.grid.box_period, cfg.grid.n, cfg.grid.dealias)


def build_initial(cfg: RunConfig, amplitude_factor: float = 1.0) -> Tuple[ChargeClassData, CoupledState]:
    data_spec = {k: dict(v) for k, v in cfg.data.items()}
    if amplitude_factor != 1.0:
        for spec in data_spec.values():
            spec["amplitude"] = float(spec.get("amplitude", 0.0)) * amplitude_factor
    data = make_data(build_grid(cfg), data_spec, seed=cfg.seed)
    return data, initial_state(data, mass=cfg.physics.M)


def schedule_settings(cfg: RunConfig) -> ScheduleSettings:
    return ScheduleSettings(
        dt=cfg.integrator.dt,
        record_every=cfg.integrator.record_every,
        max_windows=cfg.scheduler.max_windows,
        max_stages=cfg.scheduler.max_stages,
        magic_constant=cfg.scheduler.magic_constant,
    )


def verifier_config(cfg: RunConfig) -> VerifierConfig:
    v = cfg.verifier
    return VerifierConfig(
        seed=v.seed,
        trials=v.trials,
        calibration_trials=v.calibration_trials,
        n_max_exp=v.n_max_exp,
        margin=v.margin,
        lemmas=tuple(v.lemmas),
        smoke=v.smoke,
    )


def _out(cfg: RunConfig, *parts: str) -> str:
    return os.path.join(ensure_dir(cfg.output.directory), *parts)


def _saved(path: str) -> None:
    print(f"Guardado: {path}")


# -----------------------------------------------------------------------------
# Subcomandos
# -----------------------------------------------------------------------------
def cmd_simulate(cfg: RunConfig) -> int:
    write_json(cfg.to_dict(), _out(cfg, "config.json"))
    data, state = build_initial(cfg)
    T = cfg.integrator.T
    T_norm = min(T, 1.0)
    log_event("start", "simulate", "ok", t=0.0, metrics={"n": cfg.grid.n, "T": T, "dt": cfg.integrator.dt})

    traj = solve_interval(state, T, cfg.integrator.dt, cfg.integrator.record_every, T_norm=T_norm)
    diagnostics = pd.DataFrame(traj.rows)
    _saved(write_csv(diagnostics, _out(cfg, "diagnostics.csv")))

    start = em_norm_report(traj.snapshots[0], T_norm)
    final = em_norm_report(traj.final, T_norm)
    norms = {
        "T_norm": T_norm,
        "initial": start.as_dict(),
        "final": final.as_dict(),
        "data_check": besov_data_check(data, T_norm),
    }
    _saved(write_json(norms, _out(cfg, "norms.json")))

    for part, rows in pd.DataFrame(final.shell_rows()).groupby("part", sort=True):
        write_csv(rows[["N", "value"]], _out(cfg, f"spectra_{part}.csv"))
    psi = traj.final.dirac.psi
    psi_shells = shell_norms(fourier_field(data.grid, forward(data.grid, psi)))
    write_csv(pd.DataFrame({"N": list(psi_shells), "value": list(psi_shells.values())}), _out(cfg, "spectra_psi.csv"))

    if "bin" in cfg.output.formats:
        _saved(write_field(_out(cfg, "psi_final.bin"), physical_field(data.grid, psi)))
    if "html" in cfg.output.formats:
        _saved(write_figure(long_format(diagnostics), _out(cfg, "diagnostics.html"), "diagnósticos"))

    charge = diagnostics["charge"].to_numpy()
    drift = float(abs(charge[-1] - charge[0]) / charge[0]) if charge[0] > 0 else 0.0
    metrics = {
        "t_final": float(traj.final.time),
        "charge_drift": drift,
        "gauss_residual_max": float(diagnostics["gauss_residual"].max()),
        "lorenz_residual_max": float(diagnostics["lorenz_residual"].max()),
    }
    log_event("finish", "simulate", "ok", t=traj.final.time, metrics=metrics)
    print(f"{OK} t = {metrics['t_final']:.6g}, deriva de carga {drift:.3e}")
    return EXIT_OK


def _schedule_row(cfg: RunConfig, eps: float) -> Dict[str, object]:
    data, state = build_initial(cfg)
    sched = global_schedule(state, eps, cfg.scheduler.t_max, schedule_settings(cfg))
    row: Dict[str, object] = {
        "epsilon": eps,
        "stages": sched.j,
        "S_final": sched.S[-1],
        "T_1": sched.T[0] if sched.T else None,
        "tripling_ok": all(st.tripling_ok for st in sched.stages),
        "trend_ok": sched.trend_ok,
    }
    if sched.T:
        report = picard_iterate(data, sched.T[0], min(cfg.integrator.dt, sched.T[0]), PICARD_ITERATES, cfg.physics.M)
        ratios = report.ratios[1:4]
        row["contraction_max"] = max(ratios) if ratios else None
        row["contraction_ok"] = bool(ratios) and max(ratios) <= CONTRACTION_LIMIT
    return row


def cmd_schedule(cfg: RunConfig) -> int:
    _, state = build_initial(cfg)
    eps = cfg.physics.epsilon
    log_event("start", "schedule", "ok", metrics={"epsilon": eps, "t_max": cfg.scheduler.t_max})
    sched = global_schedule(state, eps, cfg.scheduler.t_max, schedule_settings(cfg))
    df = pd.DataFrame(sched.rows())
    _saved(write_csv(df, _out(cfg, "schedule.csv")))
    summary = {
        "epsilon": eps,
        "stages": sched.j,
        "S": sched.S,
        "trend_ok": sched.trend_ok,
        "trend_min": sched.trend_min,
        "magic_C": sched.stages[-1].magic_C if sched.stages else None,
        "norm_history": sched.norm_history,
    }
    _saved(write_json(summary, _out(cfg, "schedule.json")))
    ok = bool(len(df)) and bool(df["tripling_ok"].all())
    log_event("finish", "schedule", "ok" if ok else "flagged", t=sched.S[-1], metrics={"stages": sched.j})
    print(f"{OK if ok else FAIL} {sched.j} etapas, S = {sched.S[-1]:.6g}")
    return EXIT_OK


def cmd_sweep_eps(cfg: RunConfig, epsilons: Sequence[float]) -> int:
    rows = []
    for eps in epsilons:
        rows.append(_schedule_row(cfg, float(eps)))
        print(f"{INFO} ε = {eps:g}: {rows[-1]['stages']} etapas")
    _saved(write_csv(pd.DataFrame(rows), _out(cfg, "sweep_eps.csv")))
    return EXIT_OK


def cmd_growth_sweep(cfg: RunConfig, Ts: Sequence[float], amplitudes: Sequence[float]) -> int:
    rows = []
    stability: Dict[str, float] = {}
    for amp in amplitudes:
        _, state = build_initial(cfg, amplitude_factor=amp)
        certs = growth_sweep(state, Ts, cfg.integrator.dt, cfg.integrator.record_every)
        for c in certs:
            rows.append({"amplitude_factor": amp, "T": c.T, "D0": c.D0, "sup": c.sup, "C_fit": c.C_fit})
        stability[f"{amp:g}"] = sweep_stability(certs)
    df = pd.DataFrame(rows)
    _saved(write_csv(df, _out(cfg, "growth.csv")))
    by_amp = df.groupby("amplitude_factor")["C_fit"].max().sort_index()
    monotone = bool((by_amp.diff().dropna() >= -1e-12).all())
    _saved(write_json({"stability": stability, "monotone_in_amplitude": monotone}, _out(cfg, "growth.json")))
    bounded = all(v <= 2.0 for v in stability.values())
    print(f"{OK if bounded else FAIL} max/min C_fit: {stability}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    vcfg = verifier_config(cfg)
    try:
        resolve_lemmas(vcfg.lemmas)
    except ValueError as e:
        raise ConfigError("verifier.lemmas", str(e)) from e
    out_dir = _out(cfg, "verify")
    results = run_verifier(vcfg, out_dir)
    print("\n=== Lemas ===")
    for r in results:
        print(f"{OK if r.passed else FAIL} {r.lemma}: max_ratio={r.max_ratio:.4g} ({r.trials} muestras)")
    _saved(os.path.join(out_dir, "summary.json"))
    raise_on_failure(results)
    return EXIT_OK


def cmd_plotdata(run_dir: str, formats: Sequence[str]) -> int:
    if not os.path.isdir(run_dir):
        raise ArtifactError(f"No existe el directorio de ejecución {run_dir}")
    diagnostics = read_csv(os.path.join(run_dir, "diagnostics.csv"))
    tidy = long_format(diagnostics)
    _saved(write_csv(tidy, os.path.join(run_dir, "plot_diagnostics.csv")))
    outputs: List[Tuple[str, pd.DataFrame]] = [("diagnostics", tidy)]

    schedule_path = os.path.join(run_dir, "schedule.csv")
    schedule = read_csv(schedule_path) if os.path.exists(schedule_path) and os.path.getsize(schedule_path) > 1 else None
    if schedule is not None and "S_j" in schedule.columns:
        schedule = schedule.rename(columns={"S_j": "t"})
        tidy_sched = long_format(schedule, ["T_j", "Delta_j", "Dtilde_start", "Dtilde_end", "C_fit"])
        _saved(write_csv(tidy_sched, os.path.join(run_dir, "plot_schedule.csv")))
        outputs.append(("schedule", tidy_sched))

    if "html" in formats:
        for name, df in outputs:
            _saved(write_figure(df, os.path.join(run_dir, f"plot_{name}.html"), name))
    return EXIT_OK


# -----------------------------------------------------------------------------
# Entrada
# -----------------------------------------------------------------------------
def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="Fichero .json o .toml")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", default=None, help="Directorio de salida")
    p.add_argument("--lemma", action="append", default=None, help="Lema a verificar (repetible)")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--tmax", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="md2d", description="Laboratorio Maxwell–Dirac 2d")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("simulate", "schedule", "verify"):
        _common(sub.add_parser(name))
    p = sub.add_parser("plotdata")
    _common(p)
    p.add_argument("run_dir", nargs="?", default=None, help="Directorio de una ejecución (por defecto output.directory)")
    p = sub.add_parser("sweep-eps")
    _common(p)
    p.add_argument("--eps-list", type=float, nargs="+", default=list(DEFAULT_EPSILONS))
    p = sub.add_parser("growth-sweep")
    _common(p)
    p.add_argument("--T-list", dest="T_list", type=float, nargs="+", default=list(GROWTH_TS))
    p.add_argument("--amplitudes", type=float, nargs="+", default=list(GROWTH_AMPLITUDES))
    return ap


def run(args: argparse.Namespace) -> int:
    cfg = with_overrides(
        load_config(args.config),
        seed=args.seed,
        out=args.out,
        lemmas=args.lemma,
        epsilon=args.epsilon,
        tmax=args.tmax,
    )
    if args.command == "simulate":
        return cmd_simulate(cfg)
    if args.command == "schedule":
        return cmd_schedule(cfg)
    if args.command == "verify":
        return cmd_verify(cfg)
    if args.command == "plotdata":
        return cmd_plotdata(args.run_dir or cfg.output.directory, cfg.output.formats)
    if args.command == "sweep-eps":
        return cmd_sweep_eps(cfg, args.eps_list)
    if args.command == "growth-sweep":
        if any(not 0.0 < T < 1.0 for T in args.T_list):
            raise ConfigError("--T-list", "cada T debe estar en (0, 1)")
        return cmd_growth_sweep(cfg, args.T_list, args.amplitudes)
    raise ConfigError("command", f"subcomando desconocido {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as e:
        print(f"{FAIL} Configuración: {e}", file=sys.stderr)
        log_event("finish", args.command, "error", error=str(e))
        return EXIT_CONFIG
    except (BlowUpError, NoAdmissibleTError, FloatingPointError) as e:
        print(f"{FAIL} Error numérico: {e}", file=sys.stderr)
        log_event("blowup", args.command, "error", t=getattr(e, "t", None), error=str(e))
        return EXIT_NUMERICS
    except (ArtifactError, OSError) as e:
        print(f"{FAIL} E/S: {e}", file=sys.stderr)
        log_event("finish", args.command, "error", error=str(e))
        return EXIT_IO
    except LemmaFailure as e:
        print(f"{FAIL} {e}", file=sys.stderr)
        for row in e.samples[:5]:
            print(f"    {row}", file=sys.stderr)
        return EXIT_LEMMA


if __name__ == "__main__":
    sys.exit(main())
