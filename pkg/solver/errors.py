# solver/errors.py
"""Tipos de error compartidos por el núcleo numérico."""
from __future__ import annotations

from typing import Any, List, Optional


class SpectralUsageError(ValueError): ...


class ZeroModePolicyError(ValueError): ...


class ConstraintViolation(ValueError): ...


class UndefinedDirectionError(ValueError): ...


class BlowUpError(RuntimeError):
    """Estado no finito. Conserva el último estado válido y su tiempo."""

    def __init__(self, message: str, last_state: Any = None, t: Optional[float] = None):
        super().__init__(message)
        self.last_state = last_state
        self.t = t


class NoAdmissibleTError(RuntimeError): ...


class LemmaFailure(RuntimeError):
    """Una desigualdad verificada no se cumple; `samples` lleva los casos fallidos."""

    def __init__(self, lemma: str, message: str, samples: Optional[List[dict]] = None):
        super().__init__(f"{lemma}: {message}")
        self.lemma = lemma
        self.samples = samples or []
