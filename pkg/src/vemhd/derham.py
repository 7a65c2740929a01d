"""The discrete chain V_h -> E_h -> P_h.

* ``V_h``: one value per vertex.
* ``E_h``: one mean normal flux per edge, ``(1/|e|) \\int_e C . n``, with ``n``
  the clockwise rotation of the tangent along the global edge orientation.
* ``P_h``: one average per cell.

The maps between them are purely topological up to division by edge lengths
and cell areas, so ``div_map @ rot_map`` vanishes up to roundoff.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .mesh import PolyMesh
from .polyquad import cell_rule, segment_rule

__all__ = [
    "FieldV",
    "FieldE",
    "FieldP",
    "ChainMaps",
    "interp_V",
    "interp_E",
    "interp_E_from_potential",
    "interp_P",
    "rot_map",
    "div_map",
    "chain_maps",
    "zero_mean",
    "is_zero_mean",
    "commuting_check_rot",
    "commuting_check_div",
    "as_callable",
]


@dataclass(frozen=True, eq=False)
class _Field:
    mesh: PolyMesh
    values: np.ndarray

    _size_attr = ""

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        expected = getattr(self.mesh, self._size_attr)
        if vals.shape != (expected,):
            raise ValueError(f"{type(self).__name__} needs {expected} values, got shape {vals.shape}")

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def __len__(self):
        return len(self.values)

    def _wrap(self, vals):
        return type(self)(self.mesh, vals)

    def __add__(self, other):
        return self._wrap(self.values + np.asarray(other))

    def __sub__(self, other):
        return self._wrap(self.values - np.asarray(other))

    def __mul__(self, a: float):
        return self._wrap(self.values * a)

    __rmul__ = __mul__


class FieldV(_Field):
    """Vertex values of a nodal scalar field."""

    _size_attr = "n_vertices"


class FieldE(_Field):
    """Mean normal fluxes on the globally oriented edges."""

    _size_attr = "n_edges"


class FieldP(_Field):
    """Cell averages."""

    _size_attr = "n_cells"


def as_callable(f, n_args: int = 2, vector: bool = False) -> Callable:
    """Turn a sympy expression (or a pair of them) into a numpy callable of ``(x, y)``.

    Plain callables and constants pass through (constants are broadcast).
    """
    try:
        import sympy
    except ImportError:  # pragma: no cover - sympy is a declared dependency
        sympy = None
    if sympy is not None:
        x, y = sympy.symbols("x y")
        if vector and isinstance(f, (tuple, list)) and any(isinstance(c, sympy.Basic) for c in f):
            parts = [as_callable(c) for c in f]
            return lambda X, Y: np.stack(np.broadcast_arrays(*(p(X, Y) for p in parts)), axis=-1)
        if isinstance(f, sympy.Basic):
            g = sympy.lambdify((x, y), f, "numpy")
            return lambda X, Y: np.broadcast_to(np.asarray(g(X, Y), dtype=float), np.shape(X)).copy()
    if callable(f):
        return f
    if vector:
        c = np.asarray(f, dtype=float)
        return lambda X, Y: np.broadcast_to(c, np.shape(X) + (2,)).copy()
    c = float(f)
    return lambda X, Y: np.full(np.shape(X), c)


def _eval_vector(C, pts):
    out = np.asarray(C(pts[:, 0], pts[:, 1]), dtype=float)
    if out.shape == (2, len(pts)):
        out = out.T
    return np.broadcast_to(out, (len(pts), 2))


def interp_V(mesh: PolyMesh, f) -> FieldV:
    """Sample a scalar function at the mesh vertices."""
    f = as_callable(f)
    v = mesh.vertices
    return FieldV(mesh, np.broadcast_to(np.asarray(f(v[:, 0], v[:, 1]), dtype=float), (mesh.n_vertices,)))


def interp_E(mesh: PolyMesh, C, degree: int = 6) -> FieldE:
    """Mean normal flux of a vector field by Gauss quadrature of ``degree`` (at least 4)."""
    C = as_callable(C, vector=True)
    degree = max(int(degree), 4)
    out = np.empty(mesh.n_edges)
    normals = mesh.edge_normals
    for e, (a, b) in enumerate(mesh.edges):
        rule = segment_rule(mesh.vertices[a], mesh.vertices[b], degree)
        vals = _eval_vector(C, rule.points) @ normals[e]
        out[e] = rule.integrate(vals) / mesh.edge_lengths[e]
    return FieldE(mesh, out)


def interp_E_from_potential(mesh: PolyMesh, phi) -> FieldE:
    """Flux DOFs of ``rot phi = (d_y phi, -d_x phi)``, exact by the fundamental theorem of calculus."""
    return FieldE(mesh, rot_map(mesh) @ interp_V(mesh, phi).values)


def interp_P(mesh: PolyMesh, q, degree: int = 6) -> FieldP:
    """Cell averages by polygon quadrature."""
    q = as_callable(q)
    out = np.empty(mesh.n_cells)
    for c, geo in enumerate(mesh.geometry):
        rule = cell_rule(geo, degree)
        vals = np.broadcast_to(np.asarray(q(rule.points[:, 0], rule.points[:, 1]), dtype=float), rule.weights.shape)
        out[c] = rule.integrate(vals) / geo.area
    return FieldP(mesh, out)


def rot_map(mesh: PolyMesh) -> sp.csr_matrix:
    """Sparse ``E_h <- V_h`` map; the row of edge ``a -> b`` is ``(D_b - D_a) / h_e``."""
    ne = mesh.n_edges
    rows = np.repeat(np.arange(ne), 2)
    cols = mesh.edges.ravel()
    inv = 1.0 / mesh.edge_lengths
    vals = np.column_stack([-inv, inv]).ravel()
    return sp.csr_matrix((vals, (rows, cols)), shape=(ne, mesh.n_vertices))


def div_map(mesh: PolyMesh) -> sp.csr_matrix:
    """Sparse ``P_h <- E_h`` map; cell row ``(1/|P|) sum_e s_e h_e f_e`` with outward signs ``s_e``."""
    rows, cols, vals = [], [], []
    h = mesh.edge_lengths
    for c, (ce, cs) in enumerate(zip(mesh.cell_edges, mesh.cell_edge_signs)):
        rows.append(np.full(len(ce), c))
        cols.append(ce)
        vals.append(cs * h[ce] / mesh.cell_areas[c])
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(mesh.n_cells, mesh.n_edges),
    )


@dataclass(frozen=True)
class ChainMaps:
    """The two chain maps of a mesh."""

    R: sp.csr_matrix
    D: sp.csr_matrix

    def exactness_defect(self) -> float:
        """Largest entry of ``D @ R`` in absolute value."""
        DR = (self.D @ self.R).tocoo()
        return float(np.abs(DR.data).max()) if DR.nnz else 0.0


def chain_maps(mesh: PolyMesh) -> ChainMaps:
    return ChainMaps(rot_map(mesh), div_map(mesh))


def is_zero_mean(field: FieldP, tol: float = 1e-12) -> bool:
    """Whether ``sum_P |P| q_P`` vanishes relative to the field size."""
    vals = field.values
    scale = max(np.abs(vals).max(initial=0.0) * field.mesh.cell_areas.sum(), 1e-300)
    return abs(float(np.dot(field.mesh.cell_areas, vals))) <= tol * scale


def zero_mean(field: FieldP) -> FieldP:
    """Subtract the area-weighted mean."""
    a = field.mesh.cell_areas
    return FieldP(field.mesh, field.values - np.dot(a, field.values) / a.sum())


def commuting_check_rot(D, mesh: PolyMesh, degree: int = 8) -> float:
    """``max |interp_E(rot D) - rot_map interp_V(D)|`` with an edge rule of ``degree``.

    ``D`` may be a sympy expression in ``x, y`` or a callable; a callable
    must be paired with its rot via a ``(D, rotD)`` tuple.
    """
    if isinstance(D, tuple):
        Dfun, rotD = D
    else:
        import sympy

        x, y = sympy.symbols("x y")
        expr = sympy.sympify(D)
        Dfun = expr
        rotD = (sympy.diff(expr, y), -sympy.diff(expr, x))
    lhs = interp_E(mesh, rotD, degree=degree).values
    rhs = rot_map(mesh) @ interp_V(mesh, Dfun).values
    return float(np.abs(lhs - rhs).max())


def commuting_check_div(C, mesh: PolyMesh, degree: int = 8) -> float:
    """``max |interp_P(div C) - div_map interp_E(C)|`` with rules of ``degree``.

    ``C`` is a pair of sympy expressions, or a ``(C, divC)`` tuple of callables
    when ``C`` is itself callable.
    """
    import sympy

    if len(C) == 2 and callable(C[0]) and not isinstance(C[0], sympy.Basic):
        Cfun, divC = C
    else:
        x, y = sympy.symbols("x y")
        cx, cy = (sympy.sympify(c) for c in C)
        Cfun = (cx, cy)
        divC = sympy.diff(cx, x) + sympy.diff(cy, y)
    lhs = interp_P(mesh, divC, degree=degree).values
    rhs = div_map(mesh) @ interp_E(mesh, Cfun, degree=degree).values
    return float(np.abs(lhs - rhs).max())
