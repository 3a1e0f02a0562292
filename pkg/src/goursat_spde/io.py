"""On-disk formats.

Field CSV: ``#``-prefixed metadata lines, then a header row whose first cell
is empty and whose remaining cells are the t-coordinates, then one row per
x-coordinate (first cell) holding Y(x, t_j). Numbers use 17 significant
digits, which round-trips IEEE doubles; non-participating sites are ``nan``.
Nothing time-dependent goes into a CSV, so identical runs give identical bytes.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .grid import GridSpec, ScalarField


def fmt(v: float) -> str:
    return format(float(v), ".17g")


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {key}: {json.dumps(value, sort_keys=True)}" for key, value in meta.items()]


def write_field_csv(path: str, field: ScalarField, meta: dict | None = None) -> None:
    spec = field.spec
    lines = _meta_lines(meta or {})
    lines.append(",".join([""] + [fmt(t) for t in spec.t]))
    for i, x in enumerate(spec.x):
        lines.append(",".join([fmt(x)] + [fmt(v) for v in field.values[i]]))
    _write(path, "\n".join(lines) + "\n")


def read_field_csv(path: str) -> tuple[ScalarField, dict]:
    """Inverse of ``write_field_csv``; the grid is rebuilt from the coordinates."""
    meta, rows = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = json.loads(value)
            elif line.strip():
                rows.append(line.rstrip("\n").split(","))
    t = np.array([float(v) for v in rows[0][1:]])
    x = np.array([float(r[0]) for r in rows[1:]])
    values = np.array([[float(v) for v in r[1:]] for r in rows[1:]])
    spec = GridSpec(float(x[-1]), float(t[-1]), x.size - 1, t.size - 1)
    return ScalarField(spec, values), meta


def write_columns_csv(path: str, columns: dict, meta: dict | None = None) -> None:
    """Named equal-length columns, one header line."""
    lines = _meta_lines(meta or {})
    names = list(columns)
    lines.append(",".join(names))
    arrays = [np.asarray(columns[n]) for n in names]
    for row in zip(*arrays):
        lines.append(",".join(fmt(v) if np.issubdtype(type(v), np.floating) else str(v) for v in row))
    _write(path, "\n".join(lines) + "\n")


def read_columns_csv(path: str) -> dict:
    header, rows = None, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            cells = line.rstrip("\n").split(",")
            if header is None:
                header = cells
            else:
                rows.append([float(c) for c in cells])
    data = np.array(rows).reshape(-1, len(header))
    return {name: data[:, k] for k, name in enumerate(header)}


def write_json(path: str, payload: dict) -> None:
    _write(path, json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n")


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
