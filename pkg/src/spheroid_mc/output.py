"""Self-describing CSV output.

Every file starts with ``#`` comment lines carrying the exact config (as
canonical JSON) and its SHA-256, followed by a header row and numeric rows
formatted with 9 significant digits, so reruns are byte-identical.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

__all__ = ["format_value", "write_csv", "write_json"]


def format_value(v) -> str:
    if isinstance(v, str):
        return v
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".9g")


def write_csv(path, columns, rows, meta: dict | None = None) -> Path:
    """Write ``rows`` (iterable of sequences) under ``columns``.

    ``meta`` entries become ``# key: value`` lines; dict values are dumped
    as canonical JSON.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = []
    for key, value in (meta or {}).items():
        text = json.dumps(value, sort_keys=True, separators=(",", ":")) if isinstance(value, dict) else str(value)
        lines.append(f"# {key}: {text}")
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_json(path, data: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")
    return path
