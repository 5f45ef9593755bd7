# utils/telemetry.py
from __future__ import annotations
import os
import json
from datetime import datetime
from typing import Optional, Dict, Any

# ---- Configuración ----------------------------------------------------------
# Habilita/deshabilita telemetría sin tocar código.
LOG_DIR_DEFAULT = "runs"
LOG_FILE_DEFAULT = "md2d_events.jsonl"


def enabled() -> bool:
    return os.getenv("ENABLE_TELEMETRY", "1") not in {"0", "false", "False"}


def log_path() -> str:
    """Ruta del JSONL; se lee del entorno en cada llamada (los tests la redirigen)."""
    log_dir = os.getenv("TELEMETRY_DIR", LOG_DIR_DEFAULT)
    log_file = os.getenv("TELEMETRY_FILE", LOG_FILE_DEFAULT)
    return os.path.join(log_dir, log_file)


def _ensure_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except Exception:
        # Nunca romper por telemetría
        pass


def _safe_append_jsonl(path: str, record: Dict[str, Any]) -> None:
    """
    Escribe una línea JSON en `path`. Cualquier error se ignora silenciosamente
    para no afectar a la simulación.
    """
    try:
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(record, ensure_ascii=False, default=float) + "\n")
    except Exception:
        pass


def _now() -> str:
    return datetime.utcnow().isoformat(timespec="seconds") + "Z"


# -----------------------------------------------------------------------------
# API principal
# -----------------------------------------------------------------------------
def log_event(
    event_type: str,              # "start" | "finish" | "blowup" | "stage" | "lemma"
    command: str,                 # "simulate" | "schedule" | "verify" | ...
    status: str,                  # "ok" | "flagged" | "error"
    t: Optional[float] = None,
    metrics: Optional[Dict[str, Any]] = None,
    error: Optional[str] = None,
) -> None:
    """
    Evento de ejecución:
    - UTC (sufijo Z)
    - tolerante a fallos
    - configurable por entorno
    """
    if not enabled():
        return

    try:
        path = log_path()
        _ensure_dir(os.path.dirname(path) or ".")
        rec = {
            "ts": _now(),
            "type": event_type,
            "command": command,
            "status": status,
            "t": t,
            "metrics": metrics or {},
            "error": error,
        }
        _safe_append_jsonl(path, rec)
    except Exception:
        # No romper jamás por telemetría
        pass


def log_simple(event: str, scope: Optional[str] = None, metadata: Optional[Dict[str, Any]] = None) -> None:
    """Registro libre (deriva de proyección, capas omitidas, ...)."""
    if not enabled():
        return

    try:
        path = log_path()
        _ensure_dir(os.path.dirname(path) or ".")
        rec = {
            "ts": _now(),
            "event": event,
            "scope": scope,
            "metadata": metadata or {},
        }
        _safe_append_jsonl(path, rec)
    except Exception:
        pass
