"""Curve JSON reading/writing with canonical, deterministic formatting.

Floats are written with 17 significant digits so every double survives a
load/save round trip bit for bit.  Arrays of scalars are kept on one line;
everything else is indented by two spaces.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .curve import DiscreteCurve, InvalidCurveError
from .varifold import CurveSystem


class InputError(ValueError):
    """Malformed or invalid user input (maps to CLI exit status 2)."""


def format_float(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return f"{int(x)}.0" if x != 0 or math.copysign(1, x) > 0 else "-0.0"
    return format(x, ".17g")


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    if isinstance(v, str):
        return json.dumps(v)
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _is_flat(seq) -> bool:
    return all(not isinstance(v, (list, tuple, dict, np.ndarray)) for v in seq)


def dumps(obj, indent: int = 0) -> str:
    """Canonical JSON text (no trailing newline)."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if _is_flat(obj):
            return "[" + ", ".join(_scalar(v) for v in obj) + "]"
        items = [inner + dumps(v, indent + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + pad + "]"
    return _scalar(obj)


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj) + "\n")


def read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_json(text, str(path))


def parse_json(text: str, source: str = "<input>"):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def system_from_json(data, source: str = "<input>") -> CurveSystem:
    if not isinstance(data, dict) or not isinstance(data.get("curves"), list):
        raise InputError(f"{source}: expected an object with a 'curves' list")
    curves = []
    for k, entry in enumerate(data["curves"]):
        if not isinstance(entry, dict) or "nodes" not in entry:
            raise InputError(f"{source}: curve {k} needs a 'nodes' list")
        try:
            nodes = np.array(entry["nodes"], dtype=float)
            if nodes.ndim != 2 or nodes.shape[1] != 2:
                raise InvalidCurveError(f"nodes must be [x, y] pairs, got shape {nodes.shape}")
            if not np.all(np.isfinite(nodes)):
                raise InvalidCurveError("nodes must be finite numbers")
            weight = entry.get("weight", 1)
            if isinstance(weight, bool) or not isinstance(weight, (int, float)):
                raise InvalidCurveError(f"weight must be a positive integer, got {weight!r}")
            curves.append(DiscreteCurve(nodes, weight))
        except (InvalidCurveError, TypeError, ValueError) as exc:
            raise InputError(f"{source}: curve {k}: {exc}") from None
    if not curves:
        raise InputError(f"{source}: 'curves' is empty")
    return CurveSystem(curves)


def system_to_json(system: CurveSystem) -> dict:
    return {"curves": [{"nodes": c.nodes.tolist(), "weight": c.weight} for c in system]}


def load_system(path) -> CurveSystem:
    return system_from_json(read_json(path), str(path))


def save_system(path, system: CurveSystem) -> None:
    write_json(path, system_to_json(system))
