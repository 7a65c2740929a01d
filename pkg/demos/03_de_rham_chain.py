"""The discrete chain V -> E -> P: exactness and commuting interpolation."""
import numpy as np
import sympy

from vemhd.derham import chain_maps, commuting_check_div, commuting_check_rot, interp_E, interp_V
from vemhd.mesh import gen_center_refined, gen_voronoi

x, y = sympy.symbols("x y")
for m in (gen_voronoi(64, seed=3), gen_center_refined(3)):
    cm = chain_maps(m)
    print(f"{m.name}: max |div rot| = {cm.exactness_defect():.1e}")
    # any nodal field gives exactly divergence-free fluxes
    B = cm.R @ np.random.default_rng(0).standard_normal(m.n_vertices)
    print(f"  random rot field: max |div B| = {np.abs(cm.D @ B).max():.1e}")
    print(f"  rot commutes (x^2 y^3): {commuting_check_rot(x**2 * y**3, m):.1e}")
    print(f"  div commutes (x y^2, sin x): {commuting_check_div((x * y**2, sympy.sin(x)), m, degree=12):.1e}")

m = gen_voronoi(16, seed=3)
flux = interp_E(m, (sympy.tanh(y), 0), degree=12).values
pot = chain_maps(m).R @ interp_V(m, sympy.log(sympy.cosh(y))).values
print(f"Harris sheet fluxes vs rot of its potential: {np.abs(flux - pot).max():.1e}")
