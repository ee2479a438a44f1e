"""Wavefront OBJ export of a junction surface, with an optional per-vertex scalar."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def sheet_vertices(patch, n):
    (u0, u1), (v0, v1) = patch.domain
    U, V = np.meshgrid(np.linspace(u0, u1, n + 1), np.linspace(v0, v1, n + 1), indexing="ij")
    return U, V, np.asarray(patch.immersion(U, V), dtype=float)


def export_mesh(M, path, n=8, field=None):
    """Write one OBJ object per sheet on an ``(n+1) x (n+1)`` parameter grid.

    With ``field`` a parallel CSV ``<stem>.csv`` holds ``vertex,value`` rows
    (1-based OBJ indices). Returns the vertex count per sheet.
    """
    path = Path(path)
    lines, rows, counts = [f"# {M.name}"], [], []
    base = 0
    for i, patch in enumerate(M.sheets):
        U, V, X = sheet_vertices(patch, n)
        lines.append(f"o {patch.name}")
        for p in X.reshape(-1, 3):
            lines.append("v {:.12g} {:.12g} {:.12g}".format(*p))
        if field is not None:
            vals = field.value(i, U, V).ravel()
            rows.extend((base + k + 1, float(x)) for k, x in enumerate(vals))
        m = n + 1
        for a in range(n):
            for b in range(n):
                k = base + a * m + b + 1
                lines.append(f"f {k} {k + m} {k + m + 1} {k + 1}")
        base += m * m
        counts.append(m * m)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    if field is not None:
        with open(path.with_suffix(".csv"), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["vertex", "value"])
            for k, x in rows:
                w.writerow([k, repr(x)])
    return counts
