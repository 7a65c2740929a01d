"""Per-cell polynomial reconstructions from degrees of freedom.

Nodal space: three reconstructions ``V_h(P) -> P1(P)`` (elliptic,
least squares, piecewise-linear Galerkin interpolation).  Edge space: the
constant-vector projection ``Pi0`` and the lowest-order Raviart-Thomas
projection ``PiRT``.

All local matrices act on DOF vectors in cell-loop order.  Edge DOFs are the
*global* mean normal fluxes; the cell's outward signs are applied inside.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import nnls

from .mesh import CellGeometry, MeshError, PolyMesh, kernel_point
from .polyquad import ScaledMonomialBasis, segment_rule

__all__ = [
    "ReconstructionKind",
    "PolyReconstruction",
    "EdgeProjector",
    "build_elliptic",
    "build_least_squares",
    "build_galerkin_interp",
    "build_reconstruction",
    "project_P0_E",
    "project_RT",
    "rt_moment_potentials",
]


class ReconstructionKind(str, Enum):
    ELLIPTIC = "elliptic"
    LEAST_SQUARES = "ls"
    GALERKIN = "galerkin"


@dataclass(frozen=True)
class PolyReconstruction:
    """Linear map from vertex values to a (piecewise) linear polynomial.

    ``matrix`` maps DOFs to P1 coefficients in the scaled monomial basis.  For
    the Galerkin interpolant, which is piecewise linear on a fan, ``matrix``
    holds its L2 projection onto P1 while ``anchor`` / ``anchor_weights``
    describe the fan itself.
    """

    kind: ReconstructionKind
    geometry: CellGeometry
    matrix: np.ndarray
    anchor: np.ndarray | None = None
    anchor_weights: np.ndarray | None = None
    fan_mass: np.ndarray | None = field(default=None, repr=False)

    @property
    def basis(self) -> ScaledMonomialBasis:
        return ScaledMonomialBasis.for_cell(self.geometry, 1)

    @property
    def vertex_values(self) -> np.ndarray:
        """Matrix mapping DOFs to the vertex values of the reconstruction."""
        if self.kind is ReconstructionKind.GALERKIN:
            return np.eye(self.geometry.n_vertices)
        return self.basis.evaluate(self.geometry.vertices) @ self.matrix

    def evaluate(self, dofs, pts) -> np.ndarray:
        """Value of the reconstruction of ``dofs`` at points inside the cell."""
        dofs = np.asarray(dofs, dtype=float)
        pts = np.atleast_2d(pts)
        if self.kind is not ReconstructionKind.GALERKIN:
            return self.basis.evaluate(pts) @ (self.matrix @ dofs)
        xy = self.geometry.vertices
        n = len(xy)
        centre_val = self.anchor_weights @ dofs
        out = np.full(len(pts), np.nan)
        for i in range(n):
            j = (i + 1) % n
            lam = _barycentric(self.anchor, xy[i], xy[j], pts)
            inside = np.all(lam >= -1e-12, axis=1) & np.isnan(out)
            out[inside] = lam[inside] @ np.array([centre_val, dofs[i], dofs[j]])
        return out

    def operator_norm(self) -> float:
        """Spectral norm of the DOF-to-vertex-value map (a computable stand-in for the boundedness constant)."""
        return float(np.linalg.norm(self.vertex_values, 2))


def _barycentric(a, b, c, pts):
    T = np.column_stack([b - a, c - a])
    lam12 = np.linalg.solve(T, (pts - a).T).T
    return np.column_stack([1.0 - lam12.sum(axis=1), lam12])


def build_elliptic(geo: CellGeometry) -> PolyReconstruction:
    """Gradient from the boundary integral of the DOFs' linear trace; constant from the vertex mean."""
    n = geo.n_vertices
    # grad(Pi D) = (1/|P|) sum_e h_e n_e (D_a + D_b)/2
    G = np.zeros((2, n))
    w = 0.5 * geo.edge_lengths[:, None] * geo.normals / geo.area
    for i in range(n):
        G[:, i] += w[i]
        G[:, (i + 1) % n] += w[i]
    slopes = geo.diameter * G
    basis = ScaledMonomialBasis.for_cell(geo, 1)
    mvals = basis.evaluate(geo.vertices)
    const = np.full(n, 1.0 / n) - mvals[:, 1:].mean(axis=0) @ slopes
    return PolyReconstruction(ReconstructionKind.ELLIPTIC, geo, np.vstack([const, slopes]))


def build_least_squares(geo: CellGeometry) -> PolyReconstruction:
    """Least-squares fit of a linear polynomial through the vertex values."""
    A = ScaledMonomialBasis.for_cell(geo, 1).evaluate(geo.vertices)
    if np.linalg.matrix_rank(A) < 3:
        raise MeshError("collinear cell vertices")
    return PolyReconstruction(ReconstructionKind.LEAST_SQUARES, geo, np.linalg.pinv(A))


def _anchor_weights(xy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Convex weights whose vertex combination is a kernel point; equal weights when possible."""
    n = len(xy)
    alpha = np.full(n, 1.0 / n)
    p = alpha @ xy
    d = np.roll(xy, -1, axis=0) - xy
    nin = np.column_stack([-d[:, 1], d[:, 0]])
    if np.all(np.einsum("ek,ek->e", p - xy, nin) > 0):
        return p, alpha
    target = kernel_point(xy)
    if target is None:
        raise MeshError("cell has no interior kernel point")
    scale = np.abs(xy).max() + 1.0
    A = np.vstack([xy.T / scale, np.full((1, n), 10.0)])
    b = np.concatenate([target / scale, [10.0]])
    alpha, _ = nnls(A, b)
    alpha /= alpha.sum()
    return alpha @ xy, alpha


def build_galerkin_interp(geo: CellGeometry) -> PolyReconstruction:
    """Piecewise-linear interpolant on the fan from ``x* = sum alpha_V x_V``.

    The value at ``x*`` is ``sum alpha_V D(V)``; equal weights are used
    whenever the vertex mean sees the whole boundary.
    """
    xy = geo.vertices
    n = len(xy)
    anchor, alpha = _anchor_weights(xy)
    # fan mass matrix on (centre, v_0..v_{n-1}) values, then eliminate the centre
    Mfull = np.zeros((n + 1, n + 1))
    local = np.array([[2.0, 1.0, 1.0], [1.0, 2.0, 1.0], [1.0, 1.0, 2.0]]) / 12.0
    # linear moments for the L2 projection onto P1
    basis = ScaledMonomialBasis.for_cell(geo, 1)
    moments = np.zeros((3, n + 1))
    for i in range(n):
        j = (i + 1) % n
        a, b, c = anchor, xy[i], xy[j]
        area = 0.5 * abs((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
        idx = [0, i + 1, j + 1]
        Mfull[np.ix_(idx, idx)] += area * local
        mv = basis.evaluate(np.vstack([a, b, c]))  # linear, so the P1 mass applies
        moments[:, idx] += mv.T @ (area * local)
    T = np.vstack([alpha, np.eye(n)])
    fan_mass = T.T @ Mfull @ T
    fan_mass = 0.5 * (fan_mass + fan_mass.T)
    from .polyquad import monomial_gram

    proj = np.linalg.solve(monomial_gram(geo, 1), moments @ T)
    return PolyReconstruction(ReconstructionKind.GALERKIN, geo, proj, anchor, alpha, fan_mass)


def build_reconstruction(geo: CellGeometry, kind) -> PolyReconstruction:
    kind = ReconstructionKind(kind)
    if kind is ReconstructionKind.ELLIPTIC:
        return build_elliptic(geo)
    if kind is ReconstructionKind.LEAST_SQUARES:
        return build_least_squares(geo)
    return build_galerkin_interp(geo)


# ---------------------------------------------------------------------------
# edge-space projectors
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class EdgeProjector:
    """DOF-to-coefficient map for ``Pi0`` (2 rows) or ``PiRT`` (3 rows ``a, b, c``).

    ``PiRT`` coefficients describe ``a (1, 0) + b (0, 1) + c (x, y)`` in
    global coordinates.
    """

    kind: str
    geometry: CellGeometry
    matrix: np.ndarray

    def evaluate(self, dofs, pts) -> np.ndarray:
        """Projected vector field at ``pts`` (shape ``(n, 2)``)."""
        coef = self.matrix @ np.asarray(dofs, dtype=float)
        pts = np.atleast_2d(pts)
        if self.kind == "P0":
            return np.broadcast_to(coef, (len(pts), 2)).copy()
        return coef[:2] + coef[2] * pts

    def evaluation_matrices(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Matrices mapping DOFs to the x and y components at ``pts``."""
        pts = np.atleast_2d(pts)
        M = self.matrix
        if self.kind == "P0":
            return np.tile(M[0], (len(pts), 1)), np.tile(M[1], (len(pts), 1))
        return M[0] + pts[:, :1] * M[2], M[1] + pts[:, 1:2] * M[2]


def _signs_for(mesh: PolyMesh | None, cell: int | None, n: int, signs) -> np.ndarray:
    if signs is not None:
        return np.asarray(signs, dtype=float)
    if mesh is not None and cell is not None:
        return mesh.cell_edge_signs[cell].astype(float)
    return np.ones(n)


def project_P0_E(geo: CellGeometry, signs=None) -> EdgeProjector:
    """L2 projection onto constant vectors, computed from edge fluxes.

    ``signs`` are the outward signs of the global edge orientation (default
    all ``+1``, i.e. global orientation equals the CCW loop).
    """
    s = _signs_for(None, None, geo.n_vertices, signs)
    w = s * geo.edge_lengths / geo.area
    M = (w[:, None] * (geo.edge_midpoints - geo.centroid)).T
    return EdgeProjector("P0", geo, M)


def rt_moment_potentials(geo: CellGeometry) -> tuple[np.ndarray, float]:
    """Edge integrals of the zero-mean potentials ``x - x_P``, ``y - y_P``, ``|x - x_P|^2/2 - mean``.

    Returns the ``(3, n_edges)`` matrix of ``\\int_e p dl`` and ``\\int_P |x - x_P|^2``.
    """
    xc = geo.centroid
    from .polyquad import cell_rule

    rule = cell_rule(geo, 2)
    r2 = ((rule.points - xc) ** 2).sum(axis=1)
    second = rule.integrate(r2)
    mean_p3 = 0.5 * second / geo.area
    n = geo.n_vertices
    out = np.empty((3, n))
    for i in range(n):
        seg = segment_rule(geo.vertices[i], geo.vertices[(i + 1) % n], 2)
        d = seg.points - xc
        out[0, i] = seg.integrate(d[:, 0])
        out[1, i] = seg.integrate(d[:, 1])
        out[2, i] = seg.integrate(0.5 * (d**2).sum(axis=1) - mean_p3)
    return out, second


def project_RT(geo: CellGeometry, signs=None) -> EdgeProjector:
    """L2 projection onto ``RT0(P) = {a (1,0) + b (0,1) + c (x,y)}`` from edge fluxes.

    Each test field is the gradient of a zero-mean potential ``p``, so
    ``\\int_P C . grad p = sum_e (C . n_e) \\int_e p`` for fields with
    constant normal traces and constant divergence.
    """
    s = _signs_for(None, None, geo.n_vertices, signs)
    edge_int, second = rt_moment_potentials(geo)
    rhs = edge_int * s  # outward flux on each edge is s_e * dof_e
    mass = np.array([geo.area, geo.area, second])
    alpha = rhs / mass[:, None]
    xc = geo.centroid
    M = np.vstack([alpha[0] - xc[0] * alpha[2], alpha[1] - xc[1] * alpha[2], alpha[2]])
    return EdgeProjector("RT", geo, M)
