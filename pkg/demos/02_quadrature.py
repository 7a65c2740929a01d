"""Polygon quadrature and scaled monomials on a non-convex cell."""
import numpy as np

from vemhd.mesh import gen_single_cell
from vemhd.polyquad import ScaledMonomialBasis, cell_rule, monomial_gram, segment_rule

L = np.array([[0, 0], [1, 0], [1, 0.5], [0.5, 0.5], [0.5, 1], [0, 1]], dtype=float)
rule = cell_rule(L, 6)
print(f"L-shape: {len(rule.weights)} points, area {rule.weights.sum():.15f}")
print(f"integral of x^3 y^2 = {rule.integrate(rule.points[:, 0] ** 3 * rule.points[:, 1] ** 2):.15f}")

seg = segment_rule([0.0, 0.0], [2.0, 0.0], 5)
print(f"segment integral of x^5 over [0, 2] = {seg.integrate(seg.points[:, 0] ** 5):.12f} (exact {2**6 / 6:.12f})")

geo = gen_single_cell(L).geometry[0]
basis = ScaledMonomialBasis.for_cell(geo, 2)
print("scaled monomial exponents:", basis.exponents.tolist())
np.set_printoptions(precision=4, suppress=True)
print("P2 Gram matrix on the L-shape:\n", monomial_gram(geo, 2))
