# utils/config.py
# -*- coding: utf-8 -*-
"""
RunConfig: configuración de una ejecución leída de JSON o TOML.

Secciones: grid, data, physics, integrator, scheduler, verifier, output.
Las claves desconocidas se rechazan y cada campo numérico tiene un rango
explícito; los errores nombran la ruta de la clave (`grid.n`, ...).
"""
from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

try:
    import tomllib as toml  # Py 3.11+
except ModuleNotFoundError:
    import tomli as toml    # Py <=3.10

SECTIONS = ("grid", "data", "physics", "integrator", "scheduler", "verifier", "output")
DATA_FIELDS = ("psi", "E", "B")
PROFILES = ("gaussian", "random-band", "zero")
FORMATS = ("csv", "json", "bin", "html")


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


# -----------------------------------------------------------------------------
# Secciones
# -----------------------------------------------------------------------------
@dataclass(frozen=True)
class GridConfig:
    n: int = 128
    box_period: float = 16.0 * math.pi
    dealias: float = 2.0 / 3.0


@dataclass(frozen=True)
class PhysicsConfig:
    M: float = 1.0
    epsilon: float = 0.1


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1.0 / 256.0
    T: float = 0.5
    record_every: int = 8


@dataclass(frozen=True)
class SchedulerConfig:
    t_max: float = 1.0
    max_steps: int = 200_000
    max_stages: int = 4
    max_windows: int = 64
    # None: se calibra sobre los datos de cada etapa
    magic_constant: Optional[float] = None


@dataclass(frozen=True)
class VerifierSection:
    seed: int = 0
    trials: int = 10_000
    calibration_trials: Optional[int] = None
    margin: float = 1.05
    n_max_exp: int = 6
    lemmas: Tuple[str, ...] = ()
    smoke: bool = False


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "runs/md2d"
    formats: Tuple[str, ...] = ("csv", "json")


def default_data() -> Dict[str, Dict[str, Any]]:
    return {
        "psi": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0, "polarization": [1.0, 0.0]},
        "E": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0, "polarization": [1.0, 0.0]},
        "B": {"profile": "gaussian", "amplitude": 0.1, "width": 2.0},
    }


@dataclass(frozen=True)
class RunConfig:
    grid: GridConfig = field(default_factory=GridConfig)
    data: Dict[str, Dict[str, Any]] = field(default_factory=default_data)
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    scheduler: SchedulerConfig = field(default_factory=SchedulerConfig)
    verifier: VerifierSection = field(default_factory=VerifierSection)
    output: OutputConfig = field(default_factory=OutputConfig)
    seed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


# -----------------------------------------------------------------------------
# Validación
# -----------------------------------------------------------------------------
Check = Callable[[Any], bool]


def _number(key: str, value: Any, check: Check, rule: str, integer: bool = False) -> Any:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"se esperaba un número, no {type(value).__name__}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(key, f"se esperaba un entero (valor {value})")
        value = int(value)
    else:
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(key, "valor no finito")
    if not check(value):
        raise ConfigError(key, f"fuera de rango: {value} (se requiere {rule})")
    return value


def _keys(key: str, raw: Any, allowed: Sequence[str]) -> Dict[str, Any]:
    if not isinstance(raw, dict):
        raise ConfigError(key, "se esperaba una tabla/objeto")
    unknown = sorted(set(raw) - set(allowed))
    if unknown:
        prefix = f"{key}." if key else ""
        raise ConfigError(prefix + unknown[0], f"clave desconocida (permitidas: {', '.join(allowed)})")
    return raw


def _grid(raw: Dict[str, Any]) -> GridConfig:
    raw = _keys("grid", raw, ("n", "box_period", "dealias"))
    d = GridConfig()
    n = _number("grid.n", raw.get("n", d.n), lambda v: 8 <= v <= 4096 and v % 2 == 0, "entero par en [8, 4096]", True)
    box = _number("grid.box_period", raw.get("box_period", d.box_period), lambda v: v > 0, "> 0")
    dealias = _number("grid.dealias", raw.get("dealias", d.dealias), lambda v: 0 < v <= 1, "(0, 1]")
    return GridConfig(n, box, dealias)


def _vector(key: str, value: Any, length: int) -> List[float]:
    if not isinstance(value, (list, tuple)) or len(value) != length:
        raise ConfigError(key, f"se esperaba una lista de {length} números")
    return [_number(f"{key}[{i}]", v, lambda x: True, "finito") for i, v in enumerate(value)]


def _data(raw: Dict[str, Any]) -> Dict[str, Dict[str, Any]]:
    raw = _keys("data", raw, DATA_FIELDS)
    out = default_data()
    for name in DATA_FIELDS:
        if name not in raw:
            continue
        key = f"data.{name}"
        spec = _keys(key, raw[name], ("profile", "amplitude", "width", "center", "momentum", "polarization", "band", "seed"))
        components = 1 if name == "B" else 2
        profile = spec.get("profile", "gaussian")
        if profile not in PROFILES:
            raise ConfigError(f"{key}.profile", f"perfil desconocido {profile!r} (opciones: {', '.join(PROFILES)})")
        clean: Dict[str, Any] = {"profile": profile}
        clean["amplitude"] = _number(f"{key}.amplitude", spec.get("amplitude", out[name].get("amplitude", 0.0)), lambda v: 0 <= v <= 1e3, "[0, 1e3]")
        if "width" in spec:
            clean["width"] = _number(f"{key}.width", spec["width"], lambda v: v > 0, "> 0")
        if "center" in spec:
            clean["center"] = _vector(f"{key}.center", spec["center"], 2)
        if "momentum" in spec:
            clean["momentum"] = _vector(f"{key}.momentum", spec["momentum"], 2)
        if "polarization" in spec:
            if components == 1:
                raise ConfigError(f"{key}.polarization", "B³ es escalar")
            pol = _vector(f"{key}.polarization", spec["polarization"], components)
            if not any(pol):
                raise ConfigError(f"{key}.polarization", "vector nulo")
            clean["polarization"] = pol
        if "band" in spec:
            lo, hi = _vector(f"{key}.band", spec["band"], 2)
            if not 0 <= lo < hi:
                raise ConfigError(f"{key}.band", f"se requiere 0 ≤ lo < hi (band=[{lo}, {hi}])")
            clean["band"] = [lo, hi]
        if "seed" in spec:
            clean["seed"] = _number(f"{key}.seed", spec["seed"], lambda v: v >= 0, "≥ 0", True)
        out[name] = clean
    return out


def _physics(raw: Dict[str, Any]) -> PhysicsConfig:
    raw = _keys("physics", raw, ("M", "epsilon"))
    d = PhysicsConfig()
    M = _number("physics.M", raw.get("M", d.M), lambda v: abs(v) <= 1e3, "|M| ≤ 1e3")
    eps = _number("physics.epsilon", raw.get("epsilon", d.epsilon), lambda v: 0 < v <= 1, "(0, 1]")
    return PhysicsConfig(M, eps)


def _integrator(raw: Dict[str, Any]) -> IntegratorConfig:
    raw = _keys("integrator", raw, ("dt", "T", "record_every"))
    d = IntegratorConfig()
    dt = _number("integrator.dt", raw.get("dt", d.dt), lambda v: 0 < v <= 1, "(0, 1]")
    T = _number("integrator.T", raw.get("T", d.T), lambda v: 0 < v <= 1e3, "(0, 1e3]")
    every = _number("integrator.record_every", raw.get("record_every", d.record_every), lambda v: v >= 1, "≥ 1", True)
    return IntegratorConfig(dt, T, every)


def _scheduler(raw: Dict[str, Any]) -> SchedulerConfig:
    raw = _keys("scheduler", raw, ("t_max", "max_steps", "max_stages", "max_windows", "magic_constant"))
    d = SchedulerConfig()
    return SchedulerConfig(
        t_max=_number("scheduler.t_max", raw.get("t_max", d.t_max), lambda v: 0 < v <= 1e4, "(0, 1e4]"),
        max_steps=_number("scheduler.max_steps", raw.get("max_steps", d.max_steps), lambda v: v >= 1, "≥ 1", True),
        max_stages=_number("scheduler.max_stages", raw.get("max_stages", d.max_stages), lambda v: 1 <= v <= 64, "[1, 64]", True),
        max_windows=_number("scheduler.max_windows", raw.get("max_windows", d.max_windows), lambda v: 1 <= v <= 10_000, "[1, 10000]", True),
        magic_constant=None
        if raw.get("magic_constant") is None
        else _number("scheduler.magic_constant", raw["magic_constant"], lambda v: v >= 1, "≥ 1"),
    )


def _verifier(raw: Dict[str, Any]) -> VerifierSection:
    raw = _keys("verifier", raw, ("seed", "trials", "calibration_trials", "margin", "n_max_exp", "lemmas", "smoke"))
    d = VerifierSection()
    smoke = raw.get("smoke", d.smoke)
    if not isinstance(smoke, bool):
        raise ConfigError("verifier.smoke", "se esperaba true/false")
    min_trials = 1 if smoke else 1000
    trials = _number("verifier.trials", raw.get("trials", d.trials), lambda v: v >= min_trials, f"≥ {min_trials}", True)
    cal = raw.get("calibration_trials")
    if cal is not None:
        cal = _number("verifier.calibration_trials", cal, lambda v: v >= 1, "≥ 1", True)
    lemmas = raw.get("lemmas", list(d.lemmas))
    if not isinstance(lemmas, list) or not all(isinstance(x, str) for x in lemmas):
        raise ConfigError("verifier.lemmas", "se esperaba una lista de nombres")
    return VerifierSection(
        seed=_number("verifier.seed", raw.get("seed", d.seed), lambda v: 0 <= v < 2 ** 64, "[0, 2^64)", True),
        trials=trials,
        calibration_trials=cal,
        margin=_number("verifier.margin", raw.get("margin", d.margin), lambda v: v >= 1, "≥ 1"),
        n_max_exp=_number("verifier.n_max_exp", raw.get("n_max_exp", d.n_max_exp), lambda v: 1 <= v <= 10, "[1, 10]", True),
        lemmas=tuple(lemmas),
        smoke=smoke,
    )


def _output(raw: Dict[str, Any]) -> OutputConfig:
    raw = _keys("output", raw, ("directory", "formats"))
    d = OutputConfig()
    directory = raw.get("directory", d.directory)
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory", "se esperaba una ruta no vacía")
    formats = raw.get("formats", list(d.formats))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError("output.formats", f"formatos permitidos: {', '.join(FORMATS)}")
    return OutputConfig(directory, tuple(formats))


def parse_config(raw: Dict[str, Any]) -> RunConfig:
    raw = _keys("", raw, SECTIONS + ("seed",))
    cfg = RunConfig(
        grid=_grid(raw.get("grid", {})),
        data=_data(raw.get("data", {})),
        physics=_physics(raw.get("physics", {})),
        integrator=_integrator(raw.get("integrator", {})),
        scheduler=_scheduler(raw.get("scheduler", {})),
        verifier=_verifier(raw.get("verifier", {})),
        output=_output(raw.get("output", {})),
        seed=_number("seed", raw.get("seed", 0), lambda v: 0 <= v < 2 ** 64, "[0, 2^64)", True),
    )
    _check_budget(cfg)
    return cfg


def _check_budget(cfg: RunConfig) -> None:
    steps = math.ceil(cfg.scheduler.t_max / cfg.integrator.dt - 1e-9)
    if steps > cfg.scheduler.max_steps:
        raise ConfigError(
            "scheduler.max_steps",
            f"t_max/dt = {steps} pasos supera el máximo {cfg.scheduler.max_steps}",
        )


# -----------------------------------------------------------------------------
# Carga
# -----------------------------------------------------------------------------
def load_config(path: Optional[str]) -> RunConfig:
    """Sin ruta → valores por defecto. JSON (.json) o TOML (.toml)."""
    if path is None:
        return RunConfig()
    if not os.path.exists(path):
        raise ConfigError("", f"No existe el fichero de configuración {path}")
    ext = os.path.splitext(path)[1].lower()
    if ext == ".json":
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("", f"{path}: JSON inválido en línea {e.lineno}, columna {e.colno}: {e.msg}") from e
    elif ext == ".toml":
        with open(path, "rb") as f:
            try:
                raw = toml.load(f)
            except toml.TOMLDecodeError as e:
                raise ConfigError("", f"{path}: TOML inválido: {e}") from e
    else:
        raise ConfigError("", f"Extensión no soportada: {ext!r} (usa .json o .toml)")
    return parse_config(raw)


def with_overrides(
    cfg: RunConfig,
    seed: Optional[int] = None,
    out: Optional[str] = None,
    lemmas: Optional[Sequence[str]] = None,
    epsilon: Optional[float] = None,
    tmax: Optional[float] = None,
) -> RunConfig:
    """Flags de la CLI sobre el fichero; se revalida con las mismas reglas."""
    raw = cfg.to_dict()
    if seed is not None:
        raw["seed"] = seed
        raw["verifier"]["seed"] = seed
    if out is not None:
        raw["output"]["directory"] = out
    if lemmas:
        raw["verifier"]["lemmas"] = list(lemmas)
    if epsilon is not None:
        raw["physics"]["epsilon"] = epsilon
    if tmax is not None:
        raw["scheduler"]["t_max"] = tmax
    raw["verifier"]["lemmas"] = list(raw["verifier"]["lemmas"])
    raw["output"]["formats"] = list(raw["output"]["formats"])
    return parse_config(raw)
