"""Grid and report export (CSV / JSON), written atomically."""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .harness import FieldGrid
from .model import CoordinateMode


def columns(mode: CoordinateMode) -> list[str]:
    if CoordinateMode(mode) is CoordinateMode.INDEPENDENT:
        coords = ["z_plus_re", "z_minus_re"]
    else:
        coords = ["x", "t"]
    return ["alpha", *coords, "block_row", "block_col", "re", "im", "valid"]


def fmt(v: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(v), ".17g")


def grid_rows(grid: FieldGrid):
    """One tuple per matrix entry per point, in ``(alpha, x, t, row, col)`` order."""
    xs, ts = grid.spec.xs, grid.spec.ts
    n = grid.n_star
    for a in range(grid.p):
        for ix, x in enumerate(xs):
            for it, t in enumerate(ts):
                valid = bool(grid.validity[ix, it])
                for i in range(n):
                    for j in range(n):
                        v = grid.values[a, ix, it, i, j]
                        yield a + 1, float(x), float(t), i + 1, j + 1, v.real, v.imag, valid


def atomic_write(path, text: str):
    """Write via a temporary file in the target directory, then rename over ``path``."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def grid_to_csv(grid: FieldGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns(grid.spec.mode))
    for a, x, t, i, j, re, im, valid in grid_rows(grid):
        w.writerow([a, fmt(x), fmt(t), i, j, fmt(re), fmt(im), "true" if valid else "false"])
    return buf.getvalue()


def grid_to_json(grid: FieldGrid) -> str:
    cols = columns(grid.spec.mode)
    rows = []
    for a, x, t, i, j, re, im, valid in grid_rows(grid):
        # NaN is not JSON; invalid entries carry null
        rows.append(dict(zip(cols, [a, x, t, i, j, re if valid else None, im if valid else None, valid])))
    return json.dumps({"mode": CoordinateMode(grid.spec.mode).value, "columns": cols, "rows": rows}, indent=1)


def export_grid(grid: FieldGrid, path, format: str = "csv"):
    if format == "csv":
        text = grid_to_csv(grid)
    elif format == "json":
        text = grid_to_json(grid)
    else:
        raise ValueError(f"unknown export format {format!r}")
    atomic_write(path, text)


def read_grid_csv(path) -> dict:
    """Parse an exported CSV back into ``{column: ndarray}`` (the round-trip oracle)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    out = {}
    for k, name in enumerate(header):
        col = [r[k] for r in rows]
        if name == "valid":
            out[name] = np.array([c == "true" for c in col])
        elif name in ("alpha", "block_row", "block_col"):
            out[name] = np.array(col, dtype=int)
        else:
            out[name] = np.array(col, dtype=float)
    return out
