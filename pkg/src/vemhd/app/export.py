"""File output: legacy ASCII VTK for fields on polygonal meshes, and CSV tables."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..mesh import PolyMesh

__all__ = ["export_vtk", "export_csv", "write_vtk_polydata", "format_number"]


def format_number(v) -> str:
    """Decimal text with 12 significant digits; non-numeric values pass through."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def write_vtk_polydata(
    mesh: PolyMesh,
    path,
    cell_vectors: Mapping[str, np.ndarray] | None = None,
    point_scalars: Mapping[str, np.ndarray] | None = None,
    title: str = "vemhd",
) -> None:
    """Write POINTS, POLYGONS and optional CELL_DATA vectors / POINT_DATA scalars."""
    lines = ["# vtk DataFile Version 3.0", title.replace("\n", " ")[:255], "ASCII", "DATASET POLYDATA"]
    lines.append(f"POINTS {mesh.n_vertices} double")
    lines += [f"{x:.17g} {y:.17g} 0" for x, y in mesh.vertices]
    size = sum(len(c) + 1 for c in mesh.cells)
    lines.append(f"POLYGONS {mesh.n_cells} {size}")
    lines += [" ".join([str(len(c))] + [str(int(v)) for v in c]) for c in mesh.cells]
    if cell_vectors:
        lines.append(f"CELL_DATA {mesh.n_cells}")
        for name, vec in cell_vectors.items():
            vec = np.asarray(vec, dtype=float).reshape(mesh.n_cells, 2)
            lines.append(f"VECTORS {name} double")
            lines += [f"{a:.12g} {b:.12g} 0" for a, b in vec]
    if point_scalars:
        lines.append(f"POINT_DATA {mesh.n_vertices}")
        for name, val in point_scalars.items():
            val = np.asarray(val, dtype=float).reshape(mesh.n_vertices)
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines += [f"{v:.12g}" for v in val]
    Path(path).write_text("\n".join(lines) + "\n")


def export_vtk(state, mesh: PolyMesh, path, ops=None) -> None:
    """Frame file with ``B`` (``PiRT B`` at cell centroids) and nodal ``E``."""
    if ops is None:
        from ..products import EMOperators

        ops = EMOperators(mesh)
    write_vtk_polydata(
        mesh,
        path,
        cell_vectors={"B": ops.rt_at_centroids(state.B)},
        point_scalars={"E": state.E},
        title=f"vemhd t={state.t:.12g}",
    )


def export_csv(rows: Iterable, path, header: Sequence[str] | None = None) -> None:
    """Write a CSV table; rows may be mappings (keys give the header) or sequences."""
    rows = list(rows)
    if header is None:
        if rows and isinstance(rows[0], Mapping):
            header = list(rows[0].keys())
        else:
            header = []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            w.writerow(header)
        for r in rows:
            vals = [r.get(k, "") for k in header] if isinstance(r, Mapping) else list(r)
            w.writerow([format_number(v) for v in vals])
