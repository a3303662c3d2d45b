"""Byte-stable JSON and CSV output."""

from __future__ import annotations

import csv
import io
import json
import math
from typing import Any, Iterable

import numpy as np

__all__ = ["format_float", "dumps", "csv_text"]


def format_float(x: float) -> str:
    """17 significant digits, lowercase exponent, always recognisably a float."""
    text = format(float(x), ".17g")
    if not any(c in text for c in ".en"):
        text += ".0"
    return text


def _encode(obj: Any, indent: int, level: int) -> str:
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = ", " if not indent else ","
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=True)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted((str(k), v) for k, v in obj.items())
        body = sep.join(
            f"{pad}{json.dumps(k, ensure_ascii=True)}: {_encode(v, indent, level + 1)}" for k, v in items
        )
        return "{" + body + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        body = sep.join(f"{pad}{_encode(v, indent, level + 1)}" for v in obj)
        return "[" + body + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any, indent: int = 2) -> str:
    """Canonical JSON: sorted keys, fixed float format, non-finite floats as null."""
    return _encode(obj, indent, 0) + "\n"


def csv_text(header: Iterable[str], rows: Iterable[Iterable[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()
