"""Deterministic JSON output.

Floats are written with 17 significant digits so that every value
round-trips exactly; keys are sorted so reruns are byte-identical.
"""
from __future__ import annotations

import json
import math
from importlib import metadata

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .kernels import config_hash


def _float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    if s.lstrip("-").isdigit():
        s += ".0"
    return s


def _emit(obj, out: list, indent: int, level: int) -> None:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for k, key in enumerate(sorted(obj, key=str)):
            out.append(("," if k else "") + pad + json.dumps(str(key)) + ": ")
            _emit(obj[key], out, indent, level + 1)
        out.append(end + "}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        items = list(obj)
        if not items:
            out.append("[]")
            return
        out.append("[")
        for k, item in enumerate(items):
            out.append(("," if k else "") + pad)
            _emit(item, out, indent, level + 1)
        out.append(end + "]")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif obj is None:
        out.append("null")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_float(float(obj)))
    elif isinstance(obj, complex):
        _emit([obj.real, obj.imag], out, indent, level)
    else:
        out.append(json.dumps(str(obj)))


def dumps(obj, indent: int = 2) -> str:
    """Serialise ``obj`` with sorted keys and 17-digit floats."""
    out: list[str] = []
    _emit(obj, out, indent, 0)
    return "".join(out) + "\n"


def versions() -> dict:
    def v(name):
        try:
            return metadata.version(name)
        except metadata.PackageNotFoundError:
            return "unknown"
    return {"quasicompact": __version__, "numpy": np.__version__, "scipy": v("scipy"), "backend": BACKEND}


def envelope(command: str, config: dict, result: dict, seed: int | None = None) -> dict:
    """Wrap a result with the provenance needed to reproduce it."""
    return {
        "command": command,
        "model": config.get("model"),
        "params": config.get("params", {}),
        "config_hash": config_hash(config),
        "seed": seed,
        "versions": versions(),
        "result": result,
    }
