import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from vemhd.app.checks import small_meshes
from vemhd.derham import (
    FieldE,
    FieldP,
    FieldV,
    chain_maps,
    commuting_check_div,
    commuting_check_rot,
    div_map,
    interp_E,
    interp_E_from_potential,
    interp_P,
    interp_V,
    is_zero_mean,
    rot_map,
    zero_mean,
)
from vemhd.mesh import PolyMesh, gen_center_refined, gen_perturbed_quads, gen_triangular, gen_voronoi

x, y = sympy.symbols("x y")
MESHES = small_meshes()


def _edge(m, a, b):
    return next(i for i, e in enumerate(m.edges) if tuple(e) == (a, b))


class TestInterpolation:
    def test_interp_V_values(self, unit_square):
        np.testing.assert_array_equal(interp_V(unit_square, x).values, [0, 1, 1, 0])
        np.testing.assert_array_equal(interp_V(unit_square, 2.5).values, [2.5] * 4)

    def test_interp_E_fluxes_of_position(self, unit_square):
        m = unit_square
        f = interp_E(m, (x, y)).values
        # bottom, right, top, left; the left edge 0 -> 3 points up so its normal is +x
        got = [f[_edge(m, 0, 1)], f[_edge(m, 1, 2)], f[_edge(m, 2, 3)], f[_edge(m, 0, 3)]]
        np.testing.assert_allclose(got, [0, 1, 1, 0], atol=1e-15)

    def test_interp_E_constant_on_horizontal_edge(self, unit_square):
        assert interp_E(unit_square, (1, 0)).values[_edge(unit_square, 0, 1)] == pytest.approx(0, abs=1e-16)

    def test_interp_E_tanh_on_downward_edge(self):
        m = PolyMesh.from_cells([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]], edges=[[0, 1], [1, 2], [2, 3], [3, 0]])
        e = _edge(m, 3, 0)
        np.testing.assert_allclose(m.edge_normals[e], [-1, 0])
        exact = -math.log(math.cosh(1.0))
        assert interp_E(m, (sympy.tanh(y), 0)).values[e] == pytest.approx(exact, abs=1e-6)
        assert interp_E(m, (sympy.tanh(y), 0), degree=20).values[e] == pytest.approx(exact, abs=1e-14)

    def test_interp_P_examples(self, unit_square):
        assert interp_P(unit_square, 3).values == pytest.approx([3])
        assert interp_P(unit_square, x).values == pytest.approx([0.5])
        m = gen_voronoi(10, seed=3)
        np.testing.assert_allclose(interp_P(m, 2).values, 2.0)

    def test_interp_E_from_potential_matches_quadrature(self):
        m = gen_voronoi(12, seed=2)
        phi = x**2 * y - sympy.sin(x)
        a = interp_E_from_potential(m, phi).values
        b = interp_E(m, (sympy.diff(phi, y), -sympy.diff(phi, x)), degree=12).values
        np.testing.assert_allclose(a, b, atol=1e-13)

    @settings(max_examples=20, deadline=None)
    @given(alpha=st.floats(-5, 5), beta=st.floats(-5, 5))
    def test_linearity(self, alpha, beta):
        m = gen_perturbed_quads(3, 0.2, seed=7)
        f, g = x**2 - y, sympy.exp(x * y)
        C1, C2 = (x * y, y), (sympy.cos(x), x**3)
        tol = 1e-14 * (1 + abs(alpha) + abs(beta)) * 10
        np.testing.assert_allclose(
            interp_V(m, alpha * f + beta * g).values,
            alpha * interp_V(m, f).values + beta * interp_V(m, g).values,
            atol=tol,
        )
        comb = (alpha * C1[0] + beta * C2[0], alpha * C1[1] + beta * C2[1])
        np.testing.assert_allclose(
            interp_E(m, comb).values,
            alpha * interp_E(m, C1).values + beta * interp_E(m, C2).values,
            atol=tol,
        )
        np.testing.assert_allclose(
            interp_P(m, alpha * f + beta * g).values,
            alpha * interp_P(m, f).values + beta * interp_P(m, g).values,
            atol=tol,
        )

    def test_field_lengths_checked(self, unit_square):
        with pytest.raises(ValueError):
            FieldV(unit_square, np.zeros(3))
        with pytest.raises(ValueError):
            FieldE(unit_square, np.zeros(5))
        with pytest.raises(ValueError):
            FieldP(unit_square, np.zeros(2))


class TestChainMaps:
    def test_rot_examples(self, unit_square):
        m = unit_square
        r = rot_map(m) @ interp_V(m, x).values
        assert r[_edge(m, 0, 1)] == pytest.approx(1.0)
        np.testing.assert_allclose(rot_map(m) @ np.full(4, 7.0), 0)

    def test_rot_on_vertical_edge(self):
        m = PolyMesh.from_cells([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2, 3]], edges=[[0, 1], [1, 2], [2, 3], [3, 0]])
        assert (rot_map(m) @ interp_V(m, x).values)[_edge(m, 3, 0)] == 0.0

    def test_div_examples(self, unit_square):
        m = unit_square
        assert (div_map(m) @ interp_E(m, (x, y)).values) == pytest.approx([2.0])
        mesh = gen_voronoi(15, seed=1)
        np.testing.assert_allclose(div_map(mesh) @ interp_E(mesh, (3, -1)).values, 0, atol=1e-13)

    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_div_rot_vanishes(self, mesh):
        assert chain_maps(mesh).exactness_defect() <= 1e-14

    @pytest.mark.parametrize("mesh", [m for m in MESHES if m.n_vertices + m.n_edges + m.n_cells <= 200], ids=lambda m: m.name)
    def test_image_rot_is_kernel_div(self, mesh):
        cm = chain_maps(mesh)
        R, D = cm.R.toarray(), cm.D.toarray()
        rR = np.linalg.matrix_rank(R)
        assert rR == mesh.n_vertices - 1
        assert mesh.n_edges - np.linalg.matrix_rank(D) == rR

    @settings(max_examples=20, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_div_of_random_rot_is_zero(self, seed):
        m = MESHES[seed % len(MESHES)]
        v = np.random.default_rng(seed).standard_normal(m.n_vertices)
        B = rot_map(m) @ v
        assert np.abs(div_map(m) @ B).max() <= 1e-13 * max(1.0, np.abs(v).max() / m.h)


class TestCommutingDiagrams:
    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_polynomials(self, mesh):
        assert commuting_check_rot(x**2, mesh) <= 1e-13
        assert commuting_check_rot(sympy.Integer(3), mesh) == 0.0
        assert commuting_check_rot(x**3 * y - 2 * x * y**2, mesh) <= 1e-12
        assert commuting_check_div((x, y), mesh) <= 1e-12
        assert commuting_check_div((2, -1), mesh) <= 1e-13
        assert commuting_check_div((x**2 * y, y**3 - x), mesh) <= 1e-12

    def test_sin_xy_plateau(self):
        m = gen_triangular(4)
        values = {d: commuting_check_rot(sympy.sin(x * y), m, degree=d) for d in (4, 8, 12, 16)}
        assert values[4] > values[8] > values[12]
        assert values[12] <= 1e-12
        assert values[16] <= 1e-12

    @pytest.mark.parametrize("mesh", [gen_triangular(4), gen_voronoi(16, seed=1), gen_center_refined(2)], ids=lambda m: m.name)
    def test_tanh_plateau(self, mesh):
        assert commuting_check_div((sympy.tanh(y), 0), mesh, degree=12) <= 1e-12


class TestZeroMean:
    def test_zero_mean(self):
        m = gen_voronoi(10, seed=0)
        q = FieldP(m, np.arange(m.n_cells, dtype=float))
        assert not is_zero_mean(q)
        assert is_zero_mean(zero_mean(q))
