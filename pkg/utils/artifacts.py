# utils/artifacts.py
# -*- coding: utf-8 -*-
"""
Artefactos de salida: volcados binarios de campos, tablas CSV, informes JSON
y figuras HTML.

Formato binario MD2D (little-endian):
  "MD2D" | version u32 | n u32 | box_period f64 | representación u8
  seguido de los pares complex64 en orden fila-mayor (componente a componente).
"""
from __future__ import annotations

import json
import math
import os
import struct
from typing import Any, Iterable, Optional

import numpy as np
import pandas as pd

from solver.spectral import FOURIER, PHYSICAL, ComplexField2D, Grid2D

MAGIC = b"MD2D"
VERSION = 1
HEADER = struct.Struct("<4sIIdB")
REPRESENTATIONS = {PHYSICAL: 0, FOURIER: 1}

# columnas del formato largo para graficado externo
PLOT_COLUMNS = ["quantity", "t", "value"]


class ArtifactError(RuntimeError):
    """Fallo de lectura/escritura de un artefacto (código de salida 3 en la CLI)."""


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ArtifactError(f"No se puede crear el directorio {path}: {e}") from e
    return path


# -----------------------------------------------------------------------------
# Volcado binario
# -----------------------------------------------------------------------------
def write_field(path: str, field: ComplexField2D) -> str:
    g = field.grid
    header = HEADER.pack(MAGIC, VERSION, g.n, float(g.box_period), REPRESENTATIONS[field.representation])
    body = np.ascontiguousarray(field.samples, dtype="<c8").tobytes()
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(body)
    except OSError as e:
        raise ArtifactError(f"No se puede escribir {path}: {e}") from e
    return path


def read_field(path: str) -> ComplexField2D:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise ArtifactError(f"No se puede leer {path}: {e}") from e
    if len(raw) < HEADER.size:
        raise ArtifactError(f"{path}: cabecera truncada")
    magic, version, n, box, rep = HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ArtifactError(f"{path}: firma {magic!r} no es MD2D")
    if version != VERSION:
        raise ArtifactError(f"{path}: versión {version} no soportada")
    inverse = {v: k for k, v in REPRESENTATIONS.items()}
    if rep not in inverse:
        raise ArtifactError(f"{path}: representación desconocida {rep}")
    data = np.frombuffer(raw, dtype="<c8", offset=HEADER.size)
    if data.size == 0 or data.size % (n * n):
        raise ArtifactError(f"{path}: cuerpo de {data.size} valores incompatible con n={n}")
    components = data.size // (n * n)
    samples = data.astype(complex).reshape((components, n, n) if components > 1 else (n, n))
    return ComplexField2D(Grid2D(box, int(n)), samples, inverse[rep])


# -----------------------------------------------------------------------------
# Tablas e informes
# -----------------------------------------------------------------------------
def write_csv(df: pd.DataFrame, path: str) -> str:
    ensure_dir(os.path.dirname(path) or ".")
    try:
        df.to_csv(path, index=False)
    except OSError as e:
        raise ArtifactError(f"No se puede escribir {path}: {e}") from e
    return path


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(obj: Any, path: str) -> str:
    ensure_dir(os.path.dirname(path) or ".")
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_jsonable(obj), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise ArtifactError(f"No se puede escribir {path}: {e}") from e
    return path


def read_csv(path: str) -> pd.DataFrame:
    if not os.path.exists(path):
        raise ArtifactError(f"Falta el artefacto {path}")
    return pd.read_csv(path)


# -----------------------------------------------------------------------------
# Datos para graficar
# -----------------------------------------------------------------------------
def long_format(df: pd.DataFrame, quantities: Optional[Iterable[str]] = None, time_column: str = "t") -> pd.DataFrame:
    """Tabla ancha (t, q1, q2, ...) → formato largo (quantity, t, value)."""
    if time_column not in df.columns:
        raise ArtifactError(f"La tabla no tiene columna '{time_column}'")
    cols = [c for c in (quantities or df.columns) if c != time_column and c in df.columns]
    numeric = [c for c in cols if pd.api.types.is_numeric_dtype(df[c])]
    out = df.melt(id_vars=[time_column], value_vars=numeric, var_name="quantity", value_name="value")
    out = out.rename(columns={time_column: "t"})
    return out[PLOT_COLUMNS].sort_values(["quantity", "t"], kind="mergesort").reset_index(drop=True)


def write_figure(df: pd.DataFrame, path: str, title: str = "") -> str:
    """Una traza por cantidad (eje y logarítmico si todo es positivo)."""
    import plotly.graph_objects as go

    fig = go.Figure()
    for quantity, part in df.groupby("quantity", sort=True):
        fig.add_trace(go.Scatter(x=part["t"], y=part["value"], mode="lines", name=str(quantity)))
    positive = bool(len(df)) and bool((df["value"] > 0).all())
    fig.update_layout(title=title, xaxis_title="t", yaxis_type="log" if positive else "linear")
    ensure_dir(os.path.dirname(path) or ".")
    try:
        fig.write_html(path, include_plotlyjs="cdn")
    except OSError as e:
        raise ArtifactError(f"No se puede escribir {path}: {e}") from e
    return path