"""CSV and JSON persistence.

CSV files are comma-delimited with a header row; numbers are written with
17 significant digits so they round-trip exactly.  Design matrices use
columns ``x1..xp``; vectors use a single named column.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParameterError

__all__ = [
    "write_matrix",
    "read_matrix",
    "write_vector",
    "read_vector",
    "write_json",
    "read_json",
]


def _fmt(v: float) -> str:
    return f"{float(v):.17g}"


def write_matrix(path, X, prefix: str = "x") -> Path:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"{prefix}{j + 1}" for j in range(X.shape[1])])
        for row in X:
            w.writerow([_fmt(v) for v in row])
    return path


def _read_rows(path):
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ParameterError(f"{path} is empty")
    return rows[0], rows[1:]


def _to_float(path, body, width):
    if any(len(r) != width for r in body):
        raise ParameterError(f"{path}: rows have inconsistent lengths")
    try:
        out = np.array([[float(v) for v in r] for r in body], dtype=float)
    except ValueError as exc:
        raise ParameterError(f"{path}: non-numeric entry ({exc})") from None
    return out.reshape(len(body), width)


def read_matrix(path) -> np.ndarray:
    header, body = _read_rows(path)
    if not body:
        raise ParameterError(f"{path} has a header but no data rows")
    return _to_float(path, body, len(header))


def write_vector(path, v, name: str) -> Path:
    v = np.asarray(v, dtype=float).reshape(-1)
    path = Path(path)
    with path.open("w", newline="") as fh:
        fh.write(name + "\n")
        for x in v:
            fh.write(_fmt(x) + "\n")
    return path


def read_vector(path) -> np.ndarray:
    header, body = _read_rows(path)
    if len(header) != 1:
        raise ParameterError(f"{path} should have exactly one column, found {len(header)}")
    return _to_float(path, body, 1).reshape(-1)


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def write_json(path, obj) -> Path:
    """Deterministic JSON: sorted keys, fixed indentation, trailing newline."""
    path = Path(path)
    text = json.dumps(obj, indent=2, sort_keys=True, default=_default, allow_nan=False)
    path.write_text(text + "\n")
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParameterError(f"{path} is not valid JSON: {exc}") from None
