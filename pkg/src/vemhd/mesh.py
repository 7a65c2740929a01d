"""Polygonal meshes: data model, geometry, regularity diagnostics, generators and I/O.

A :class:`PolyMesh` stores vertex coordinates, globally oriented edges and
counter-clockwise cell loops.  Every edge is oriented from its lower vertex
index to its higher one; each cell keeps, for every segment of its loop, the
global edge index and a sign that is ``+1`` when the global edge normal points
out of the cell.

Edge normals follow ``n = (t_y, -t_x)`` with ``t`` the unit tangent along the
global orientation, so for a CCW loop the outward normal of a segment
traversed in the global direction is ``+n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "MeshError",
    "MeshFormatError",
    "PolyMesh",
    "CellGeometry",
    "RegularityReport",
    "compute_geometry",
    "check_regularity",
    "gen_triangular",
    "gen_perturbed_quads",
    "gen_voronoi",
    "gen_center_refined",
    "gen_single_cell",
    "read_mesh",
    "write_mesh",
    "generate",
]


class MeshError(ValueError):
    """Structural problem with a mesh (bad indices, degenerate cells, ...)."""


class MeshFormatError(MeshError):
    """Malformed mesh file."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _signed_area(xy: np.ndarray) -> float:
    x, y = xy[:, 0], xy[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True)
class CellGeometry:
    """Geometric quantities of one polygonal cell.

    Per-edge arrays follow the cell loop: entry ``i`` belongs to the segment
    from loop vertex ``i`` to loop vertex ``i + 1``.  ``normals`` are outward
    and ``tangents`` follow the loop (CCW), so ``normals = (t_y, -t_x)``.
    """

    area: float
    diameter: float
    centroid: np.ndarray
    vertices: np.ndarray
    edge_lengths: np.ndarray
    edge_midpoints: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    inradius: float

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


@dataclass(frozen=True)
class RegularityReport:
    """Per-cell mesh regularity ratios.

    ``rho_star`` is the inscribed-disk radius (over the polygon kernel) divided
    by the cell diameter and ``rho_edge`` the shortest edge over the diameter.
    """

    rho: float
    rho_star: np.ndarray
    rho_edge: np.ndarray

    @property
    def min_rho_star(self) -> float:
        return float(self.rho_star.min())

    @property
    def min_rho_edge(self) -> float:
        return float(self.rho_edge.min())

    @property
    def violating_star(self) -> np.ndarray:
        return np.flatnonzero(self.rho_star < self.rho)

    @property
    def violating_edge(self) -> np.ndarray:
        return np.flatnonzero(self.rho_edge < self.rho)

    @property
    def satisfied(self) -> bool:
        return self.min_rho_star >= self.rho and self.min_rho_edge >= self.rho


@dataclass(frozen=True, eq=False)
class PolyMesh:
    """Immutable 2D polygonal mesh.

    Build meshes with :meth:`from_cells`; the constructor assumes consistent
    input and is used internally.
    """

    vertices: np.ndarray
    edges: np.ndarray
    cells: tuple[np.ndarray, ...]
    cell_edges: tuple[np.ndarray, ...]
    cell_edge_signs: tuple[np.ndarray, ...]
    boundary_vertex_flags: np.ndarray
    boundary_edge_flags: np.ndarray
    extent: tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    name: str = field(default="mesh")

    # -- construction -------------------------------------------------------
    @classmethod
    def from_cells(
        cls,
        vertices,
        cells: Sequence[Sequence[int]],
        edges=None,
        extent=None,
        name: str = "mesh",
    ) -> "PolyMesh":
        """Build a mesh from vertex coordinates and CCW cell loops.

        When ``edges`` is given it must list every mesh edge exactly once; its
        orientation is kept.  Otherwise edges point from lower to higher
        vertex index.
        """
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2:
            raise MeshError("vertices must be an (n, 2) array")
        nv = len(verts)
        loops = []
        for c, loop in enumerate(cells):
            arr = np.asarray(loop, dtype=np.int64)
            if arr.ndim != 1 or len(arr) < 3:
                raise MeshError(f"cell {c} has fewer than 3 vertices")
            if arr.min() < 0 or arr.max() >= nv:
                raise MeshError(f"cell {c} references a vertex index out of range")
            if len(np.unique(arr)) != len(arr):
                raise MeshError(f"cell {c} repeats a vertex")
            loops.append(arr)

        edge_index: dict[tuple[int, int], int] = {}
        edge_list: list[tuple[int, int]] = []
        if edges is not None:
            earr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
            for e, (a, b) in enumerate(earr):
                if not (0 <= a < nv and 0 <= b < nv):
                    raise MeshError(f"edge {e} references a vertex index out of range")
                if a == b:
                    raise MeshError(f"edge {e} has identical endpoints")
                key = (min(a, b), max(a, b))
                if key in edge_index:
                    raise MeshError(f"edge {e} is listed twice")
                edge_index[key] = e
                edge_list.append((int(a), int(b)))

        count: dict[int, int] = {}
        cell_edges, cell_signs = [], []
        for c, loop in enumerate(loops):
            ce = np.empty(len(loop), dtype=np.int64)
            cs = np.empty(len(loop), dtype=np.int64)
            for i, a in enumerate(loop):
                b = loop[(i + 1) % len(loop)]
                key = (int(min(a, b)), int(max(a, b)))
                e = edge_index.get(key)
                if e is None:
                    if edges is not None:
                        raise MeshError(f"cell {c} uses an edge {key} missing from the edge list")
                    e = len(edge_list)
                    edge_index[key] = e
                    edge_list.append(key)
                ce[i] = e
                cs[i] = 1 if edge_list[e][0] == a else -1
                count[e] = count.get(e, 0) + 1
            cell_edges.append(ce)
            cell_signs.append(cs)

        ne = len(edge_list)
        ecount = np.array([count.get(e, 0) for e in range(ne)])
        if np.any(ecount == 0):
            raise MeshError(f"edge {int(np.flatnonzero(ecount == 0)[0])} belongs to no cell")
        if np.any(ecount > 2):
            raise MeshError(f"edge {int(np.flatnonzero(ecount > 2)[0])} is shared by more than two cells")
        edge_arr = np.array(edge_list, dtype=np.int64).reshape(-1, 2)
        bedge = ecount == 1
        bvert = np.zeros(nv, dtype=bool)
        bvert[edge_arr[bedge].ravel()] = True

        if extent is None:
            extent = (
                float(verts[:, 0].min()),
                float(verts[:, 0].max()),
                float(verts[:, 1].min()),
                float(verts[:, 1].max()),
            )
        mesh = cls(
            vertices=verts,
            edges=edge_arr,
            cells=tuple(loops),
            cell_edges=tuple(cell_edges),
            cell_edge_signs=tuple(cell_signs),
            boundary_vertex_flags=bvert,
            boundary_edge_flags=bedge,
            extent=tuple(float(v) for v in extent),
            name=name,
        )
        mesh.validate()
        return mesh

    def validate(self) -> None:
        """Check orientation, orientation consistency and edge sharing."""
        for c, loop in enumerate(self.cells):
            if _signed_area(self.vertices[loop]) <= 0.0:
                raise MeshError(f"cell {c} is degenerate or not counter-clockwise")
        # interior edges must be traversed in opposite directions by their two cells
        seen = np.zeros(self.n_edges, dtype=np.int64)
        for signs, ce in zip(self.cell_edge_signs, self.cell_edges):
            np.add.at(seen, ce, signs)
        interior = ~self.boundary_edge_flags
        if np.any(seen[interior] != 0):
            bad = int(np.flatnonzero(interior & (seen != 0))[0])
            raise MeshError(f"edge {bad} is traversed in the same direction by both cells")
        if np.any(self.edges[:, 0] == self.edges[:, 1]):
            raise MeshError("edge with identical endpoints")

    # -- sizes ------------------------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def interior_vertices(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_vertex_flags)

    @property
    def interior_edges(self) -> np.ndarray:
        return np.flatnonzero(~self.boundary_edge_flags)

    # -- geometry ---------------------------------------------------------------
    @cached_property
    def edge_lengths(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    @cached_property
    def edge_tangents(self) -> np.ndarray:
        d = self.vertices[self.edges[:, 1]] - self.vertices[self.edges[:, 0]]
        return d / self.edge_lengths[:, None]

    @cached_property
    def edge_normals(self) -> np.ndarray:
        t = self.edge_tangents
        return np.column_stack([t[:, 1], -t[:, 0]])

    @cached_property
    def edge_midpoints(self) -> np.ndarray:
        return 0.5 * (self.vertices[self.edges[:, 0]] + self.vertices[self.edges[:, 1]])

    @cached_property
    def geometry(self) -> tuple[CellGeometry, ...]:
        return tuple(compute_geometry(self))

    @cached_property
    def cell_areas(self) -> np.ndarray:
        return np.array([g.area for g in self.geometry])

    @cached_property
    def cell_diameters(self) -> np.ndarray:
        return np.array([g.diameter for g in self.geometry])

    @cached_property
    def cell_centroids(self) -> np.ndarray:
        return np.array([g.centroid for g in self.geometry])

    @property
    def h(self) -> float:
        """Largest cell diameter."""
        return float(self.cell_diameters.max())

    def __repr__(self) -> str:
        return (
            f"PolyMesh(name={self.name!r}, vertices={self.n_vertices}, "
            f"edges={self.n_edges}, cells={self.n_cells})"
        )


# ---------------------------------------------------------------------------
# geometry and regularity
# ---------------------------------------------------------------------------
def _kernel_candidates(xy: np.ndarray, n: int = 64) -> np.ndarray:
    """Deterministic candidate centres spread over the polygon."""
    centroid = _polygon_centroid(xy)
    cands = [centroid, xy.mean(axis=0)]
    nv = len(xy)
    # points pulled from the centroid toward vertices and edge midpoints
    mids = 0.5 * (xy + np.roll(xy, -1, axis=0))
    anchors = np.vstack([xy, mids])
    fracs = np.linspace(0.1, 0.7, max(1, (n - 2) // len(anchors) + 1))
    for f in fracs:
        for a in anchors:
            cands.append(centroid + f * (a - centroid))
            if len(cands) >= n:
                break
        if len(cands) >= n:
            break
    del nv
    return np.array(cands[:n])


def _polygon_centroid(xy: np.ndarray) -> np.ndarray:
    x, y = xy[:, 0], xy[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def _line_distances(xy: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Signed distances from points to each edge line (positive inside for CCW)."""
    p0 = xy
    d = np.roll(xy, -1, axis=0) - xy
    length = np.hypot(d[:, 0], d[:, 1])
    # inward normal of a CCW polygon is (-t_y, t_x)
    nin = np.column_stack([-d[:, 1], d[:, 0]]) / length[:, None]
    rel = pts[:, None, :] - p0[None, :, :]
    return np.einsum("pek,ek->pe", rel, nin)


def kernel_point(xy: np.ndarray) -> np.ndarray | None:
    """A point of the polygon kernel (every vertex visible), or ``None``.

    Prefers the centroid; otherwise returns the candidate with the largest
    clearance from all edge lines.
    """
    cands = _kernel_candidates(xy)
    dist = _line_distances(xy, cands).min(axis=1)
    if dist[0] > 0:
        return cands[0]
    best = int(np.argmax(dist))
    if dist[best] <= 0:
        return None
    return cands[best]


def _inradius(xy: np.ndarray) -> float:
    cands = _kernel_candidates(xy)
    dist = _line_distances(xy, cands).min(axis=1)
    return float(max(dist.max(), 0.0))


def compute_geometry(mesh: PolyMesh) -> list[CellGeometry]:
    """Per-cell area, diameter, centroid, edge data and inscribed radius."""
    out = []
    for c, loop in enumerate(mesh.cells):
        xy = mesh.vertices[loop]
        area = _signed_area(xy)
        if area <= 0.0:
            raise MeshError(f"cell {c} has non-positive area {area!r}")
        diff = xy[:, None, :] - xy[None, :, :]
        diam = float(np.sqrt((diff**2).sum(-1)).max())
        d = np.roll(xy, -1, axis=0) - xy
        lengths = np.hypot(d[:, 0], d[:, 1])
        t = d / lengths[:, None]
        out.append(
            CellGeometry(
                area=area,
                diameter=diam,
                centroid=_polygon_centroid(xy),
                vertices=xy,
                edge_lengths=lengths,
                edge_midpoints=0.5 * (xy + np.roll(xy, -1, axis=0)),
                normals=np.column_stack([t[:, 1], -t[:, 0]]),
                tangents=t,
                inradius=_inradius(xy),
            )
        )
    return out


def check_regularity(mesh: PolyMesh, rho: float = 0.2) -> RegularityReport:
    """Report star-shapedness and edge-length ratios against ``rho``.

    Diagnostic only; never raises for irregular meshes.
    """
    geo = mesh.geometry
    rho_star = np.array([g.inradius / g.diameter for g in geo])
    rho_edge = np.array([g.edge_lengths.min() / g.diameter for g in geo])
    return RegularityReport(rho=float(rho), rho_star=rho_star, rho_edge=rho_edge)


# ---------------------------------------------------------------------------
# generators on [-1, 1]^2
# ---------------------------------------------------------------------------
def _check_n(n, name="n"):
    if int(n) != n or n < 1:
        raise ValueError(f"{name} must be a positive integer, got {n!r}")
    return int(n)


def _grid_vertices(n: int) -> np.ndarray:
    s = np.linspace(-1.0, 1.0, n + 1)
    X, Y = np.meshgrid(s, s, indexing="xy")
    return np.column_stack([X.ravel(), Y.ravel()])


def gen_triangular(n: int) -> PolyMesh:
    """Structured triangulation: ``n x n`` squares each cut along one diagonal."""
    n = _check_n(n)
    verts = _grid_vertices(n)
    vid = lambda i, j: j * (n + 1) + i  # noqa: E731
    cells = []
    for j in range(n):
        for i in range(n):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            cells.append([a, b, c])
            cells.append([a, c, d])
    return PolyMesh.from_cells(verts, cells, name=f"tri{n}")


def gen_perturbed_quads(n: int, amplitude: float = 0.2, seed: int = 0) -> PolyMesh:
    """Uniform quads with interior vertices moved by up to ``amplitude * h`` per axis."""
    n = _check_n(n)
    if not 0.0 <= amplitude < 0.5:
        raise ValueError("amplitude must lie in [0, 0.5)")
    verts = _grid_vertices(n)
    h = 2.0 / n
    rng = np.random.default_rng(seed)
    shift = rng.uniform(-amplitude * h, amplitude * h, size=verts.shape)
    interior = (np.abs(verts[:, 0]) < 1.0) & (np.abs(verts[:, 1]) < 1.0)
    verts = verts + shift * interior[:, None]
    vid = lambda i, j: j * (n + 1) + i  # noqa: E731
    cells = [
        [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
        for j in range(n)
        for i in range(n)
    ]
    return PolyMesh.from_cells(verts, cells, name=f"pquad{n}")


def _clipped_voronoi(seeds: np.ndarray, merge_tol: float = 1e-9):
    """Voronoi cells of ``seeds`` clipped to [-1, 1]^2 by mirroring."""
    from scipy.spatial import Voronoi

    mirrored = [seeds]
    for axis, val in ((0, -1.0), (0, 1.0), (1, -1.0), (1, 1.0)):
        m = seeds.copy()
        m[:, axis] = 2.0 * val - m[:, axis]
        mirrored.append(m)
    vor = Voronoi(np.vstack(mirrored))
    vv = vor.vertices.copy()
    # snap to the box
    for axis in (0, 1):
        for val in (-1.0, 1.0):
            close = np.abs(vv[:, axis] - val) < 1e-10
            vv[close, axis] = val
    loops = []
    for i in range(len(seeds)):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or len(region) < 3:
            raise MeshError("unbounded Voronoi region for an interior seed")
        loops.append(list(region))

    # merge near-coincident vertices and renumber used ones
    used = sorted({v for loop in loops for v in loop})
    coords = vv[used]
    order = np.lexsort((coords[:, 1], coords[:, 0]))
    remap: dict[int, int] = {}
    kept: list[np.ndarray] = []
    from scipy.spatial import cKDTree

    tree = cKDTree(coords)
    rep = -np.ones(len(used), dtype=np.int64)
    for k in order:
        if rep[k] >= 0:
            continue
        rep[k] = len(kept)
        kept.append(coords[k])
        for j in tree.query_ball_point(coords[k], merge_tol):
            if rep[j] < 0:
                rep[j] = rep[k]
    for local, v in enumerate(used):
        remap[v] = int(rep[local])
    verts = np.array(kept)

    cells = []
    for loop in loops:
        new = []
        for v in loop:
            r = remap[v]
            if not new or new[-1] != r:
                new.append(r)
        if new[0] == new[-1]:
            new.pop()
        xy = verts[new]
        if _signed_area(xy) < 0:
            new = new[::-1]
        cells.append(new)
    return verts, cells


def _lloyd_centroids(verts, cells) -> np.ndarray:
    return np.array([_polygon_centroid(verts[c]) for c in cells])


def gen_voronoi(n_seeds: int, lloyd_iters: int = 100, seed: int = 0) -> PolyMesh:
    """Voronoi tessellation of uniform random seeds, relaxed by Lloyd iterations."""
    n_seeds = _check_n(n_seeds, "n_seeds")
    if n_seeds < 2:
        raise ValueError("need at least two seeds")
    if lloyd_iters < 0:
        raise ValueError("lloyd_iters must be non-negative")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n_seeds, 2))
    verts, cells = _clipped_voronoi(pts)
    for _ in range(lloyd_iters):
        pts = _lloyd_centroids(verts, cells)
        verts, cells = _clipped_voronoi(pts)
    return PolyMesh.from_cells(verts, cells, name=f"voronoi{n_seeds}")


def gen_center_refined(levels: int, refine_radius: float = 0.5, base: int = 4) -> PolyMesh:
    """Quadtree mesh refined toward the origin, with hanging nodes kept as polygon vertices.

    Starting from a ``base x base`` grid, each level splits every leaf square
    whose closest point to the origin lies within ``refine_radius / 2**(l-1)``
    at level ``l``.  A coarse square bordering finer ones carries the fine
    corners on its edges as extra vertices.
    """
    if int(levels) != levels or levels < 0:
        raise ValueError("levels must be a non-negative integer")
    base = _check_n(base, "base")
    if refine_radius <= 0:
        raise ValueError("refine_radius must be positive")
    size = 2.0 / base
    leaves = [(-1.0 + i * size, -1.0 + j * size, size) for j in range(base) for i in range(base)]
    for lev in range(1, int(levels) + 1):
        radius = refine_radius / 2 ** (lev - 1)
        new = []
        for x0, y0, s in leaves:
            cx = min(max(0.0, x0), x0 + s)
            cy = min(max(0.0, y0), y0 + s)
            if np.hypot(cx, cy) < radius:
                hs = s / 2
                new += [(x0, y0, hs), (x0 + hs, y0, hs), (x0, y0 + hs, hs), (x0 + hs, y0 + hs, hs)]
            else:
                new.append((x0, y0, s))
        leaves = new

    # dyadic coordinates are exact in binary floating point
    corner_set: dict[tuple[float, float], int] = {}
    for x0, y0, s in leaves:
        for p in ((x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)):
            corner_set.setdefault(p, len(corner_set))
    pts = np.array(list(corner_set.keys()))
    by_y: dict[float, list[int]] = {}
    by_x: dict[float, list[int]] = {}
    for k, (x, y) in enumerate(pts):
        by_y.setdefault(y, []).append(k)
        by_x.setdefault(x, []).append(k)

    def on_segment(a, b):
        (xa, ya), (xb, yb) = a, b
        if ya == yb:
            ids = [k for k in by_y[ya] if min(xa, xb) < pts[k, 0] < max(xa, xb)]
            return sorted(ids, key=lambda k: pts[k, 0], reverse=xb < xa)
        ids = [k for k in by_x[xa] if min(ya, yb) < pts[k, 1] < max(ya, yb)]
        return sorted(ids, key=lambda k: pts[k, 1], reverse=yb < ya)

    cells = []
    for x0, y0, s in leaves:
        corners = [(x0, y0), (x0 + s, y0), (x0 + s, y0 + s), (x0, y0 + s)]
        loop = []
        for i in range(4):
            a, b = corners[i], corners[(i + 1) % 4]
            loop.append(corner_set[a])
            loop.extend(on_segment(a, b))
        cells.append(loop)
    return PolyMesh.from_cells(pts, cells, name=f"refined{levels}")


def gen_single_cell(vertices) -> PolyMesh:
    """A one-cell mesh from a CCW vertex loop (useful for tests and demos)."""
    verts = np.asarray(vertices, dtype=float)
    return PolyMesh.from_cells(verts, [list(range(len(verts)))], name="cell")


def generate(kind: str, n: int, seed: int = 0, **kwargs) -> PolyMesh:
    """Dispatch by mesh kind: ``tri``, ``pquad``, ``voronoi`` or ``refined``.

    For ``voronoi`` the seed count is ``n * n`` so that ``n`` plays the role of
    the number of cells per direction, as for the structured kinds.  For
    ``refined`` ``n`` is the number of refinement levels.
    """
    if kind == "tri":
        return gen_triangular(n)
    if kind == "pquad":
        return gen_perturbed_quads(n, kwargs.get("amplitude", 0.2), seed)
    if kind == "voronoi":
        return gen_voronoi(n * n, kwargs.get("lloyd_iters", 100), seed)
    if kind == "refined":
        return gen_center_refined(n, kwargs.get("refine_radius", 0.5), kwargs.get("base", 4))
    raise ValueError(f"unknown mesh kind {kind!r}")


# ---------------------------------------------------------------------------
# text I/O
# ---------------------------------------------------------------------------
def write_mesh(mesh: PolyMesh, path) -> None:
    """Write the VERTICES / EDGES / CELLS text format (17 significant digits)."""
    lines = ["VERTICES", str(mesh.n_vertices)]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.vertices]
    lines += ["EDGES", str(mesh.n_edges)]
    lines += [f"{a} {b} {int(f)}" for (a, b), f in zip(mesh.edges, mesh.boundary_edge_flags)]
    lines += ["CELLS", str(mesh.n_cells)]
    lines += [" ".join([str(len(c))] + [str(v) for v in c]) for c in mesh.cells]
    Path(path).write_text("\n".join(lines) + "\n")


def read_mesh(path) -> PolyMesh:
    """Parse a mesh file written by :func:`write_mesh`."""
    raw = Path(path).read_text().splitlines()
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(raw) if ln.strip() and not ln.lstrip().startswith("#")]
    pos = 0

    def expect_section(name):
        nonlocal pos
        if pos >= len(lines):
            raise MeshFormatError(f"missing {name} section", raw and len(raw))
        lineno, text = lines[pos]
        if text.upper() != name:
            raise MeshFormatError(f"expected section {name}, found {text!r}", lineno)
        pos += 1
        if pos >= len(lines):
            raise MeshFormatError(f"missing count for {name}", lineno)
        lineno, text = lines[pos]
        try:
            count = int(text)
        except ValueError:
            raise MeshFormatError(f"bad count {text!r} for {name}", lineno) from None
        if count < 0:
            raise MeshFormatError("negative count", lineno)
        pos += 1
        return count

    def take(count, name):
        nonlocal pos
        if pos + count > len(lines):
            raise MeshFormatError(f"{name} section is truncated", lines[-1][0])
        chunk = lines[pos : pos + count]
        pos += count
        return chunk

    nv = expect_section("VERTICES")
    verts = []
    for lineno, text in take(nv, "VERTICES"):
        parts = text.split()
        if len(parts) != 2:
            raise MeshFormatError("vertex line needs two coordinates", lineno)
        try:
            verts.append([float(parts[0]), float(parts[1])])
        except ValueError:
            raise MeshFormatError(f"bad coordinate in {text!r}", lineno) from None

    ne = expect_section("EDGES")
    edges = []
    for lineno, text in take(ne, "EDGES"):
        parts = text.split()
        if len(parts) != 3:
            raise MeshFormatError("edge line needs 'v0 v1 boundary_flag'", lineno)
        try:
            a, b, _ = (int(p) for p in parts)
        except ValueError:
            raise MeshFormatError(f"bad edge entry {text!r}", lineno) from None
        if not (0 <= a < nv and 0 <= b < nv):
            raise MeshFormatError(f"edge references vertex out of range (have {nv})", lineno)
        edges.append([a, b])

    nc = expect_section("CELLS")
    cells = []
    for lineno, text in take(nc, "CELLS"):
        try:
            parts = [int(p) for p in text.split()]
        except ValueError:
            raise MeshFormatError(f"bad cell entry {text!r}", lineno) from None
        if not parts or parts[0] != len(parts) - 1:
            raise MeshFormatError("cell vertex count does not match entries", lineno)
        if any(not 0 <= v < nv for v in parts[1:]):
            raise MeshFormatError(f"cell references vertex out of range (have {nv})", lineno)
        cells.append(parts[1:])
    if pos != len(lines):
        raise MeshFormatError("trailing content after CELLS", lines[pos][0])
    return PolyMesh.from_cells(np.array(verts).reshape(-1, 2), cells, edges=np.array(edges).reshape(-1, 2),
                               name=Path(path).stem)
