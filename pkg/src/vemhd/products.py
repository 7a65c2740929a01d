"""Stabilized local inner products and their global sparse assembly.

Every local Gram is ``consistency + stabilization``; the stabilization is
the DOF-Euclidean product of the projection residual scaled by ``|P|``.

Assembly order is fixed: cells in index order, entries row-major within each
cell, duplicates summed by ``scipy.sparse`` COO-to-CSR conversion.  The result
is therefore bit-stable for a given mesh.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .derham import div_map, rot_map
from .mesh import CellGeometry, PolyMesh
from .polyquad import monomial_gram
from .projectors import (
    EdgeProjector,
    PolyReconstruction,
    ReconstructionKind,
    build_reconstruction,
    project_P0_E,
    project_RT,
)

__all__ = [
    "LocalGram",
    "gram_V",
    "gram_E",
    "gram_P",
    "assemble",
    "EMOperators",
    "NormRecord",
    "norm_X_diagnostics",
]


@dataclass(frozen=True)
class LocalGram:
    """Local Gram matrix split into consistency and stabilization parts."""

    space: str
    consistency: np.ndarray
    stabilization: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.consistency + self.stabilization

    def form(self, u, v) -> float:
        return float(np.asarray(u) @ self.matrix @ np.asarray(v))

    def is_spd(self) -> bool:
        try:
            np.linalg.cholesky(self.matrix)
        except np.linalg.LinAlgError:
            return False
        return bool(np.allclose(self.matrix, self.matrix.T, rtol=0, atol=1e-14 * np.abs(self.matrix).max()))


def _sym(A):
    return 0.5 * (A + A.T)


def gram_V(recon: PolyReconstruction) -> LocalGram:
    """Nodal-space Gram for one cell and one reconstruction."""
    geo = recon.geometry
    n = geo.n_vertices
    if recon.kind is ReconstructionKind.GALERKIN:
        cons = recon.fan_mass
    else:
        cons = recon.matrix.T @ monomial_gram(geo, 1) @ recon.matrix
    resid = np.eye(n) - recon.vertex_values
    stab = geo.area * resid.T @ resid
    return LocalGram("V", _sym(cons), _sym(stab))


def gram_E(geo: CellGeometry, signs, global_normals) -> LocalGram:
    """Edge-space Gram from the constant-vector projection.

    ``global_normals`` are the unit normals of the cell's edges in their
    global orientation, row ``i`` for loop segment ``i``.
    """
    P0 = project_P0_E(geo, signs).matrix
    cons = geo.area * P0.T @ P0
    resid = np.eye(geo.n_vertices) - np.asarray(global_normals) @ P0
    stab = geo.area * resid.T @ resid
    return LocalGram("E", _sym(cons), _sym(stab))


def gram_P(mesh: PolyMesh) -> sp.csr_matrix:
    """Exact L2 product of piecewise constants: ``diag(|P|)``."""
    return sp.diags(mesh.cell_areas).tocsr()


def assemble(mesh: PolyMesh, grams, dof_maps, size: int) -> sp.csr_matrix:
    """Scatter-add local matrices by their global DOF indices."""
    rows, cols, vals = [], [], []
    for G, idx in zip(grams, dof_maps):
        M = G.matrix if isinstance(G, LocalGram) else np.asarray(G)
        idx = np.asarray(idx)
        rows.append(np.repeat(idx, len(idx)))
        cols.append(np.tile(idx, len(idx)))
        vals.append(M.ravel())
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    A.sum_duplicates()
    return A


class EMOperators:
    """Global operators of the electromagnetic discretization on one mesh.

    Parameters
    ----------
    mesh
        The polygonal mesh.
    kind
        Nodal reconstruction: ``"elliptic"``, ``"ls"`` or ``"galerkin"``.
    """

    def __init__(self, mesh: PolyMesh, kind="elliptic"):
        self.mesh = mesh
        self.kind = ReconstructionKind(kind)

    @cached_property
    def reconstructions(self) -> list[PolyReconstruction]:
        return [build_reconstruction(g, self.kind) for g in self.mesh.geometry]

    @cached_property
    def rt_projectors(self) -> list[EdgeProjector]:
        m = self.mesh
        return [project_RT(g, m.cell_edge_signs[c]) for c, g in enumerate(m.geometry)]

    @cached_property
    def grams_V(self) -> list[LocalGram]:
        return [gram_V(r) for r in self.reconstructions]

    @cached_property
    def grams_E(self) -> list[LocalGram]:
        m = self.mesh
        return [
            gram_E(g, m.cell_edge_signs[c], m.edge_normals[m.cell_edges[c]])
            for c, g in enumerate(m.geometry)
        ]

    @cached_property
    def M_V(self) -> sp.csr_matrix:
        return assemble(self.mesh, self.grams_V, self.mesh.cells, self.mesh.n_vertices)

    @cached_property
    def M_E(self) -> sp.csr_matrix:
        return assemble(self.mesh, self.grams_E, self.mesh.cell_edges, self.mesh.n_edges)

    @cached_property
    def M_P(self) -> sp.csr_matrix:
        return gram_P(self.mesh)

    @cached_property
    def R(self) -> sp.csr_matrix:
        return rot_map(self.mesh)

    @cached_property
    def D(self) -> sp.csr_matrix:
        return div_map(self.mesh)

    def cross_operator(self, ux: np.ndarray, uy: np.ndarray) -> sp.csr_matrix:
        """Sparse map ``B -> M_V I(u x PiRT B)`` for vertex velocity values.

        ``u x B = u_x B_y - u_y B_x``, evaluated per cell at its vertices and
        weighted by the local nodal Gram.
        """
        m = self.mesh
        rows, cols, vals = [], [], []
        for c, (proj, G) in enumerate(zip(self.rt_projectors, self.grams_V)):
            loop = m.cells[c]
            Ex, Ey = proj.evaluation_matrices(m.vertices[loop])
            local = G.matrix @ (ux[loop, None] * Ey - uy[loop, None] * Ex)
            ce = m.cell_edges[c]
            rows.append(np.repeat(loop, len(ce)))
            cols.append(np.tile(ce, len(loop)))
            vals.append(local.ravel())
        return sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(m.n_vertices, m.n_edges),
        ).tocsr()

    def rt_at_centroids(self, B) -> np.ndarray:
        """Cell-centroid values of ``PiRT B``, shape ``(n_cells, 2)``."""
        B = np.asarray(B, dtype=float)
        m = self.mesh
        return np.array(
            [p.evaluate(B[m.cell_edges[c]], m.cell_centroids[c])[0] for c, p in enumerate(self.rt_projectors)]
        )

    def norm_V(self, E) -> float:
        E = np.asarray(E, dtype=float)
        return float(np.sqrt(E @ (self.M_V @ E)))

    def norm_E(self, B) -> float:
        B = np.asarray(B, dtype=float)
        return float(np.sqrt(B @ (self.M_E @ B)))

    def norm_P(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return float(np.sqrt(q @ (self.M_P @ q)))


@dataclass(frozen=True)
class NormRecord:
    """Squared discrete norms used in the stability analysis of a step."""

    B_div_sq: float
    E_curl_sq: float
    div_part: float
    rot_part: float


def norm_X_diagnostics(ops: EMOperators, B, E, dt: float) -> NormRecord:
    """``|B|_div^2 = <B,B>_E/dt + |div B|_P^2`` and ``|E|_curl^2 = <E,E>_V + dt |rot E|_E^2``."""
    B = np.asarray(B, dtype=float)
    E = np.asarray(E, dtype=float)
    divB = ops.D @ B
    rotE = ops.R @ E
    div_part = float(divB @ (ops.M_P @ divB))
    rot_part = float(rotE @ (ops.M_E @ rotE))
    return NormRecord(
        B_div_sq=float(B @ (ops.M_E @ B)) / dt + div_part,
        E_curl_sq=float(E @ (ops.M_V @ E)) + dt * rot_part,
        div_part=div_part,
        rot_part=rot_part,
    )
