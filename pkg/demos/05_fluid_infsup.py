"""Velocity/pressure pair: local projections and the discrete inf-sup constant."""
import numpy as np

from vemhd.fluid import basis_PSv, build_cell_ops, infsup_probe
from vemhd.mesh import gen_triangular, gen_voronoi

geo = gen_voronoi(9, seed=4).geometry[4]
ops = build_cell_ops(geo)
S = basis_PSv()
dofs = ops.nodal_values() @ S.T
print(f"{geo.n_vertices}-gon: {4 * geo.n_vertices} velocity DOFs, PSv dimension {np.linalg.matrix_rank(S)}")
print(f"  elliptic projection reproduces PSv: {np.abs(ops.pi_nabla @ dofs - S.T).max():.1e}")
print(f"  L2 projection reproduces PSv:       {np.abs(ops.pi0 @ dofs - S.T).max():.1e}")

for n in (2, 4, 8):
    res = infsup_probe(gen_triangular(n))
    print(f"triangles n={n}: beta_h = {res.beta:.4f} ({res.n_velocity} velocity, {res.n_pressure} pressure unknowns)")
res = infsup_probe(gen_voronoi(25, seed=1))
print(f"voronoi 25 cells: beta_h = {res.beta:.4f}")
