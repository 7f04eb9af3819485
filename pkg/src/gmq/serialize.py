"""Deterministic text serialization helpers.

All floating-point numbers written by this package use 17 significant
digits, which is enough for an exact decimal round trip of IEEE doubles.
JSON is rendered by hand so float formatting stays under our control.
"""

from __future__ import annotations

import math

import numpy as np


def fmt17(value: float) -> str:
    """Format a float with 17 significant digits (exact double round trip)."""
    return format(float(value), ".17g")


def _render(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise ValueError(f"non-finite float {x!r} is not representable in JSON")
        return fmt17(x)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, dict):
        items = (f"{_render(str(k))}: {_render(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps_json(obj) -> str:
    """Render ``obj`` as a JSON string with 17-significant-digit floats."""
    return _render(obj)


def dump_json(obj, path) -> None:
    """Write ``obj`` to ``path`` as JSON with a trailing newline."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_json(obj))
        fh.write("\n")
