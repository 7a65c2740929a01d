"""Nodal reconstructions, edge projections and the stabilized inner products."""
import numpy as np

from vemhd.mesh import gen_voronoi
from vemhd.polyquad import ScaledMonomialBasis, monomial_gram
from vemhd.products import EMOperators
from vemhd.projectors import build_reconstruction, project_RT

m = gen_voronoi(36, seed=2)
geo = max(m.geometry, key=lambda g: g.n_vertices)
print(f"cell with {geo.n_vertices} vertices, area {geo.area:.4f}")
V = ScaledMonomialBasis.for_cell(geo, 1).evaluate(geo.vertices)
for kind in ("elliptic", "ls", "galerkin"):
    r = build_reconstruction(geo, kind)
    print(f"  {kind:9s} reproduces P1: {np.abs(r.matrix @ V - np.eye(3)).max():.1e}  operator norm {r.operator_norm():.3f}")

c = m.geometry.index(geo)
signs = m.cell_edge_signs[c]
gn = m.edge_normals[m.cell_edges[c]]
dofs = gn @ np.array([0.2, -0.4]) + 1.5 * np.einsum("ij,ij->i", m.edge_midpoints[m.cell_edges[c]], gn)
print("  RT projection of (0.2, -0.4) + 1.5 (x, y):", project_RT(geo, signs).matrix @ dofs)

for kind in ("elliptic", "ls", "galerkin"):
    ops = EMOperators(m, kind)
    worst = max(
        np.abs(ScaledMonomialBasis.for_cell(g, 1).evaluate(g.vertices).T @ G.matrix @ ScaledMonomialBasis.for_cell(g, 1).evaluate(g.vertices) - monomial_gram(g, 1)).max()
        for g, G in zip(m.geometry, ops.grams_V)
    )
    lam = np.linalg.eigvalsh(ops.M_V.toarray())
    print(f"{kind:9s} nodal Gram: consistency defect {worst:.1e}, eigenvalues in [{lam.min():.2e}, {lam.max():.2e}]")
