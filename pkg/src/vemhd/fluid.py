"""Velocity/pressure virtual element pair on polygons.

Velocities carry two components at every vertex and every edge midpoint;
pressures are cell averages with zero global mean.  Per cell we build

* ``Pi_nabla``: elliptic projection onto ``PSv = {q in [P2]^2 : div q in P0}``,
* ``Pi0``: L2 projection onto ``[P2]^2`` through the split
  ``[P2]^2 = grad P3 (+) G2perp`` and the enhancement identity
  ``<v - Pi_nabla v, g> = 0`` for ``g`` in ``G2perp``,
* the divergence row (Simpson on each edge),
* mass and stiffness Grams,

and an inf-sup probe on the global pair.

Local DOF layout: loop node ``2i`` is vertex ``i``, node ``2i + 1`` the
midpoint of segment ``i``; DOF ``2 * node + component``.  Global nodes are
vertices first, then edge midpoints.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .mesh import CellGeometry, MeshError, PolyMesh
from .polyquad import ScaledMonomialBasis, cell_rule, monomial_gram
from .products import LocalGram, assemble

__all__ = [
    "FieldTV",
    "FieldP0",
    "VelocityCellOps",
    "basis_PSv",
    "vector_basis_values",
    "build_cell_ops",
    "div_TV",
    "gram_TV",
    "stiff_TV",
    "tv_dof_map",
    "InfSupResult",
    "infsup_probe",
]

_SIMPSON = np.array([1.0, 4.0, 1.0]) / 6.0


@dataclass(frozen=True, eq=False)
class FieldTV:
    """Velocity DOFs, interleaved ``(x, y)`` per node; nodes are vertices then edge midpoints."""

    mesh: PolyMesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        n = 2 * (self.mesh.n_vertices + self.mesh.n_edges)
        if vals.shape != (n,):
            raise ValueError(f"FieldTV needs {n} values")

    @classmethod
    def interpolate(cls, mesh: PolyMesh, v) -> "FieldTV":
        pts = np.vstack([mesh.vertices, mesh.edge_midpoints])
        vals = np.asarray(v(pts[:, 0], pts[:, 1]), dtype=float)
        if vals.shape == (2, len(pts)):
            vals = vals.T
        return cls(mesh, np.broadcast_to(vals, (len(pts), 2)).ravel())


@dataclass(frozen=True, eq=False)
class FieldP0:
    """Cell pressures with zero area-weighted mean."""

    mesh: PolyMesh
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.shape != (self.mesh.n_cells,):
            raise ValueError("FieldP0 needs one value per cell")
        mean = float(np.dot(self.mesh.cell_areas, vals))
        if abs(mean) > 1e-12 * max(np.abs(vals).max(initial=0.0) * self.mesh.cell_areas.sum(), 1e-300):
            raise ValueError("pressure field does not have zero mean")


# ---------------------------------------------------------------------------
# polynomial machinery: [P_k]^2 in scaled monomials, index = comp * n_k + alpha
# ---------------------------------------------------------------------------
def basis_PSv() -> np.ndarray:
    """Coefficients (rows, in the ``[P2]^2`` scaled-monomial basis) of a basis of PSv.

    The first two rows are the constant fields.  The divergence of
    ``(sum a_i m_i, sum b_i m_i)`` has linear part
    ``(2 a_4 + b_5) s_x + (a_5 + 2 b_6) s_y`` (1-based monomial indices), so
    PSv is cut out of the 12-dimensional space by two constraints.
    """
    rows = []

    def vec(ax=(), by=()):
        r = np.zeros(12)
        for i, c in ax:
            r[i] = c
        for i, c in by:
            r[6 + i] = c
        return r

    rows.append(vec(ax=[(0, 1)]))
    rows.append(vec(by=[(0, 1)]))
    rows.append(vec(ax=[(1, 1)]))
    rows.append(vec(ax=[(2, 1)]))
    rows.append(vec(by=[(1, 1)]))
    rows.append(vec(by=[(2, 1)]))
    rows.append(vec(ax=[(5, 1)]))  # (y^2, 0)
    rows.append(vec(by=[(3, 1)]))  # (0, x^2)
    rows.append(vec(ax=[(3, 1)], by=[(4, -2)]))  # (x^2, -2xy)
    rows.append(vec(ax=[(4, -2)], by=[(5, 1)]))  # (-2xy, y^2)
    return np.array(rows)


def vector_basis_values(basis: ScaledMonomialBasis, pts) -> np.ndarray:
    """Values of the ``[P_k]^2`` basis at points: shape ``(n_pts, 2 n_k, 2)``."""
    m = basis.evaluate(pts)
    nk = m.shape[1]
    out = np.zeros((len(m), 2 * nk, 2))
    out[:, :nk, 0] = m
    out[:, nk:, 1] = m
    return out


def vector_basis_grads(basis: ScaledMonomialBasis, pts) -> np.ndarray:
    """Jacobians ``d q_c / d x_j``: shape ``(n_pts, 2 n_k, 2, 2)``."""
    g = basis.gradient(pts)
    nk = g.shape[1]
    out = np.zeros((len(g), 2 * nk, 2, 2))
    out[:, :nk, 0, :] = g
    out[:, nk:, 1, :] = g
    return out


def _laplacian_p2(h: float) -> np.ndarray:
    """Laplacian of each scaled quadratic monomial (constant), shape ``(6,)``."""
    return np.array([0.0, 0.0, 0.0, 2.0, 0.0, 2.0]) / h**2


def _grad_p3_in_p2(h: float) -> np.ndarray:
    """Rows: gradients of ``m_2 .. m_10`` of P3 written in the ``[P2]^2`` basis."""
    exps3 = ScaledMonomialBasis(np.zeros(2), 1.0, 3).exponents
    exps2 = [tuple(e) for e in ScaledMonomialBasis(np.zeros(2), 1.0, 2).exponents]
    rows = []
    for a, b in exps3[1:]:
        r = np.zeros(12)
        if a > 0:
            r[exps2.index((a - 1, b))] = a / h
        if b > 0:
            r[6 + exps2.index((a, b - 1))] = b / h
        rows.append(r)
    return np.array(rows)


@dataclass(frozen=True)
class VelocityCellOps:
    """Per-cell velocity operators; all matrices act on the ``4 N`` local DOFs.

    ``pi_nabla`` and ``pi0`` return coefficients in the ``[P2]^2``
    scaled-monomial basis (12 entries).
    """

    geometry: CellGeometry
    nodes: np.ndarray
    pi_nabla: np.ndarray
    pi0: np.ndarray
    div_row: np.ndarray
    gperp: np.ndarray
    mass12: np.ndarray
    stiff12: np.ndarray

    @property
    def basis(self) -> ScaledMonomialBasis:
        return ScaledMonomialBasis.for_cell(self.geometry, 2)

    def nodal_values(self) -> np.ndarray:
        """Matrix mapping ``[P2]^2`` coefficients to local DOFs."""
        V = vector_basis_values(self.basis, self.nodes)  # (n_nodes, 12, 2)
        return V.transpose(0, 2, 1).reshape(2 * len(self.nodes), 12)

    def sample(self, v) -> np.ndarray:
        """Local DOFs of a callable vector field ``v(x, y) -> (..., 2)``."""
        vals = np.asarray(v(self.nodes[:, 0], self.nodes[:, 1]), dtype=float)
        if vals.shape == (2, len(self.nodes)):
            vals = vals.T
        return np.broadcast_to(vals, (len(self.nodes), 2)).ravel()


def _loop_nodes(geo: CellGeometry) -> np.ndarray:
    n = geo.n_vertices
    nodes = np.empty((2 * n, 2))
    nodes[0::2] = geo.vertices
    nodes[1::2] = geo.edge_midpoints
    return nodes


def div_TV(geo: CellGeometry) -> np.ndarray:
    """Row functional ``(1/|P|) sum_e \\int_e v . n`` by Simpson on each edge."""
    n = geo.n_vertices
    row = np.zeros(4 * n)
    for i in range(n):
        nodes = (2 * i, 2 * i + 1, (2 * i + 2) % (2 * n))
        for w, node in zip(_SIMPSON, nodes):
            row[2 * node : 2 * node + 2] += w * geo.edge_lengths[i] * geo.normals[i]
    return row / geo.area


def _trace_matrix(n_loop_nodes: int, i: int, s: np.ndarray) -> np.ndarray:
    """Quadratic trace interpolation on segment ``i`` at parameters ``s`` in [0, 1].

    Returns ``(len(s), 2 n_nodes)`` pairs of rows for the x and y components
    stacked as ``(len(s), 2, 4N)``.
    """
    L = np.column_stack([(1 - s) * (1 - 2 * s), 4 * s * (1 - s), s * (2 * s - 1)])
    nodes = (2 * i, 2 * i + 1, (2 * i + 2) % n_loop_nodes)
    out = np.zeros((len(s), 2, 2 * n_loop_nodes))
    for k, node in enumerate(nodes):
        out[:, 0, 2 * node] = L[:, k]
        out[:, 1, 2 * node + 1] = L[:, k]
    return out


def build_cell_ops(geo: CellGeometry) -> VelocityCellOps:
    """Assemble every per-cell velocity operator from the DOFs alone."""
    n = geo.n_vertices
    ndof = 4 * n
    nodes = _loop_nodes(geo)
    basis = ScaledMonomialBasis.for_cell(geo, 2)
    h = geo.diameter
    xc = geo.centroid

    # [P2]^2 mass and stiffness in the monomial basis
    m6 = monomial_gram(geo, 2)
    mass12 = np.zeros((12, 12))
    mass12[:6, :6] = m6
    mass12[6:, 6:] = m6
    rule = cell_rule(geo, 2)
    g = basis.gradient(rule.points)  # (q, 6, 2)
    k6 = np.einsum("q,qak,qbk->ab", rule.weights, g, g)
    stiff12 = np.zeros((12, 12))
    stiff12[:6, :6] = k6
    stiff12[6:, 6:] = k6

    # --- elliptic projection onto PSv -----------------------------------
    S = basis_PSv()  # (10, 12)
    K = S @ stiff12 @ S.T
    lap = _laplacian_p2(h)
    rhs = np.zeros((10, ndof))
    for i in range(n):
        idx = (2 * i, 2 * i + 1, (2 * i + 2) % (2 * n))
        pts = nodes[list(idx)]
        nrm = geo.normals[i]
        J = vector_basis_grads(basis, pts)  # (3, 12, 2, 2)
        dqn = np.einsum("pjck,k->pjc", J, nrm) @ np.eye(2)  # (3, 12, 2) = grad q . n
        dqn = np.einsum("rj,pjc->prc", S, dqn)  # (3, 10, 2)
        # g = Lap q . (x - x_P), with Lap q constant for each PSv member
        lapq = np.stack([S[:, :6] @ lap, S[:, 6:] @ lap], axis=-1)  # (10, 2)
        gval = (pts - xc) @ lapq.T  # (3, 10)
        for k, node in enumerate(idx):
            w = _SIMPSON[k] * geo.edge_lengths[i]
            rhs[:, 2 * node : 2 * node + 2] += w * (dqn[k] - gval[k][:, None] * nrm[None, :])
    # replace the two constant rows by the vertex-sum condition
    Vq = vector_basis_values(basis, geo.vertices)  # (n, 12, 2)
    P0q = np.einsum("rj,pjc->cr", S, Vq)  # (2, 10): sum over vertices
    P0v = np.zeros((2, ndof))
    for i in range(n):
        P0v[0, 4 * i] = 1.0
        P0v[1, 4 * i + 1] = 1.0
    K[:2] = P0q
    rhs[:2] = P0v
    pi_nabla = S.T @ np.linalg.solve(K, rhs)  # (12, ndof)

    # --- L2 projection onto [P2]^2 -------------------------------------
    Gp3 = _grad_p3_in_p2(h)  # (9, 12)
    # G2perp: mass12-orthogonal complement of grad P3 (contains no constants)
    C = Gp3 @ mass12
    gperp = sla.null_space(C).T  # (3, 12)
    div_row = div_TV(geo)
    moments = np.zeros((12, ndof))
    # gradient part: <v, grad p> = sum_e \int_e p v.n - div(v) \int_P p
    p3 = ScaledMonomialBasis.for_cell(geo, 3)
    crule = cell_rule(geo, 3)
    p_int = crule.weights @ p3.evaluate(crule.points)[:, 1:]  # (9,)
    sq, wq = np.polynomial.legendre.leggauss(4)
    sq = 0.5 * (sq + 1.0)
    wq = 0.5 * wq
    for i in range(n):
        a, b = geo.vertices[i], geo.vertices[(i + 1) % n]
        pts = a + sq[:, None] * (b - a)
        pv = p3.evaluate(pts)[:, 1:]  # (4, 9)
        T = _trace_matrix(2 * n, i, sq)  # (4, 2, ndof)
        vn = np.einsum("pcd,c->pd", T, geo.normals[i])  # (4, ndof)
        moments[:9] += geo.edge_lengths[i] * np.einsum("p,pk,pd->kd", wq, pv, vn)
    moments[:9] -= np.outer(p_int, div_row)
    # complement part: <v, g> = <Pi_nabla v, g>
    moments[9:] = gperp @ mass12 @ pi_nabla
    T12 = np.vstack([Gp3, gperp])  # rows: test fields in the monomial basis
    mono_moments = np.linalg.solve(T12, moments)
    pi0 = np.linalg.solve(mass12, mono_moments)

    return VelocityCellOps(
        geometry=geo,
        nodes=nodes,
        pi_nabla=pi_nabla,
        pi0=pi0,
        div_row=div_row,
        gperp=gperp,
        mass12=mass12,
        stiff12=stiff12,
    )


def gram_TV(ops: VelocityCellOps) -> LocalGram:
    """L2-like Gram: ``Pi0`` consistency plus ``|P|``-scaled DOF stabilization."""
    cons = ops.pi0.T @ ops.mass12 @ ops.pi0
    resid = np.eye(len(ops.div_row)) - ops.nodal_values() @ ops.pi0
    stab = ops.geometry.area * resid.T @ resid
    return LocalGram("TV", 0.5 * (cons + cons.T), 0.5 * (stab + stab.T))


def stiff_TV(ops: VelocityCellOps) -> LocalGram:
    """Gradient semi-inner product: ``Pi_nabla`` consistency plus unit-scaled DOF stabilization."""
    cons = ops.pi_nabla.T @ ops.stiff12 @ ops.pi_nabla
    resid = np.eye(len(ops.div_row)) - ops.nodal_values() @ ops.pi_nabla
    stab = resid.T @ resid
    return LocalGram("TVgrad", 0.5 * (cons + cons.T), 0.5 * (stab + stab.T))


def tv_dof_map(mesh: PolyMesh, cell: int) -> np.ndarray:
    """Global velocity DOF indices of a cell in local order."""
    loop = mesh.cells[cell]
    ce = mesh.cell_edges[cell]
    nodes = np.empty(2 * len(loop), dtype=np.int64)
    nodes[0::2] = loop
    nodes[1::2] = mesh.n_vertices + ce
    return np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()


@dataclass(frozen=True)
class InfSupResult:
    beta: float
    n_velocity: int
    n_pressure: int


class _GlobalFluid:
    def __init__(self, mesh: PolyMesh):
        self.mesh = mesh

    @cached_property
    def cell_ops(self):
        return [build_cell_ops(g) for g in self.mesh.geometry]

    @cached_property
    def dof_maps(self):
        return [tv_dof_map(self.mesh, c) for c in range(self.mesh.n_cells)]

    @property
    def size(self) -> int:
        return 2 * (self.mesh.n_vertices + self.mesh.n_edges)

    def stiffness(self) -> sp.csr_matrix:
        return assemble(self.mesh, [stiff_TV(o) for o in self.cell_ops], self.dof_maps, self.size)

    def mass(self) -> sp.csr_matrix:
        return assemble(self.mesh, [gram_TV(o) for o in self.cell_ops], self.dof_maps, self.size)

    def divergence(self) -> sp.csr_matrix:
        """``b(v, q) = q^T B v`` with row ``P`` equal to ``|P| div_P``."""
        rows, cols, vals = [], [], []
        for c, (o, idx) in enumerate(zip(self.cell_ops, self.dof_maps)):
            rows.append(np.full(len(idx), c))
            cols.append(idx)
            vals.append(o.geometry.area * o.div_row)
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.mesh.n_cells, self.size),
        )

    def interior_dofs(self) -> np.ndarray:
        m = self.mesh
        bnode = np.concatenate([m.boundary_vertex_flags, m.boundary_edge_flags])
        nodes = np.flatnonzero(~bnode)
        return np.column_stack([2 * nodes, 2 * nodes + 1]).ravel()


def infsup_probe(mesh: PolyMesh, tol: float = 1e-10) -> InfSupResult:
    """Discrete inf-sup constant of the velocity/pressure pair with zero boundary velocity.

    ``beta^2`` is the smallest eigenvalue of ``Z^T B A^{-1} B^T Z`` relative to
    ``Z^T M_p Z``, where ``A`` is the velocity stiffness on interior DOFs and
    ``Z`` spans the zero-mean pressures.
    """
    fl = _GlobalFluid(mesh)
    inner = fl.interior_dofs()
    if len(inner) == 0 or mesh.n_cells < 2:
        raise MeshError("no interior velocity DOFs or zero-mean pressures: inf-sup probe undefined")
    A = fl.stiffness()[inner][:, inner].toarray()
    B = fl.divergence()[:, inner].toarray()
    areas = mesh.cell_areas
    Z = sla.null_space(areas[None, :])
    Mp = Z.T @ np.diag(areas) @ Z
    BZ = B.T @ Z
    S = BZ.T @ sla.cho_solve(sla.cho_factor(A), BZ)
    lam = sla.eigh(0.5 * (S + S.T), Mp, eigvals_only=True)
    beta = float(np.sqrt(max(lam.min(), 0.0)))
    if beta < tol:
        raise MeshError(f"inf-sup failure: beta = {beta:.3e}")
    return InfSupResult(beta, len(inner), Z.shape[1])
