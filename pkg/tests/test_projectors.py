import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_rt_projection, tensor_gauss
from vemhd.app.checks import small_meshes
from vemhd.mesh import gen_single_cell, generate
from vemhd.polyquad import ScaledMonomialBasis, cell_rule
from vemhd.projectors import (
    ReconstructionKind,
    build_elliptic,
    build_galerkin_interp,
    build_least_squares,
    build_reconstruction,
    project_P0_E,
    project_RT,
)

MESHES = small_meshes()
KINDS = ["elliptic", "ls", "galerkin"]
SQUARE = gen_single_cell([[0, 0], [1, 0], [1, 1], [0, 1]]).geometry[0]


def _cell_fluxes(geo, field):
    """Outward mean normal fluxes of a field whose normal trace is constant on each edge."""
    return np.einsum("ij,ij->i", field(geo.edge_midpoints), geo.normals)


class TestNodalReconstructions:
    @pytest.mark.parametrize("kind", KINDS)
    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_reproduces_linear_monomials(self, mesh, kind):
        for geo in mesh.geometry:
            r = build_reconstruction(geo, kind)
            V = ScaledMonomialBasis.for_cell(geo, 1).evaluate(geo.vertices)
            np.testing.assert_allclose(r.matrix @ V, np.eye(3), atol=1e-13)

    @pytest.mark.parametrize("kind", KINDS)
    def test_bounded_and_not_growing(self, kind):
        for mesh_kind, ns in (("tri", (4, 8, 16, 32)), ("pquad", (4, 8, 16, 32)), ("voronoi", (4, 8, 16))):
            norms = [max(build_reconstruction(g, kind).operator_norm() for g in generate(mesh_kind, n, seed=1).geometry) for n in ns]
            assert max(norms) <= 10
            assert norms[-1] <= 1.5 * norms[0]

    def test_elliptic_examples(self):
        r = build_elliptic(SQUARE)
        m2 = ScaledMonomialBasis.for_cell(SQUARE, 1).evaluate(SQUARE.vertices)[:, 1]
        np.testing.assert_allclose(r.matrix @ m2, [0, 1, 0], atol=1e-15)
        np.testing.assert_allclose(r.matrix @ np.full(4, 2.5), [2.5, 0, 0], atol=1e-15)
        # x = 0.5 + sqrt(2) m2 on the unit square (h = sqrt 2)
        np.testing.assert_allclose(r.matrix @ np.array([0, 1, 1, 0]), [0.5, math.sqrt(2), 0], atol=1e-15)

    def test_least_squares_example(self):
        r = build_least_squares(SQUARE)
        np.testing.assert_allclose(r.matrix @ np.array([1, 2, 3, 4]), [2.5, 0, 2 * math.sqrt(2)], atol=1e-14)
        pts = np.array([[0.2, 0.7], [0.9, 0.1]])
        np.testing.assert_allclose(r.evaluate([1, 2, 3, 4], pts), 1.5 + 2 * pts[:, 1])

    def test_galerkin_example(self):
        r = build_galerkin_interp(SQUARE)
        np.testing.assert_allclose(r.anchor, [0.5, 0.5])
        d = np.array([0, 1, 0, 1.0])
        assert r.evaluate(d, [[0.5, 0.5]])[0] == pytest.approx(0.5)
        assert r.evaluate(d, [[0.5, 0.25]])[0] == pytest.approx(0.5)

    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_galerkin_reproduces_linear_pointwise(self, mesh):
        rng = np.random.default_rng(1)
        for geo in mesh.geometry[:10]:
            r = build_galerkin_interp(geo)
            a, b, c = rng.standard_normal(3)
            d = a + b * geo.vertices[:, 0] + c * geo.vertices[:, 1]
            pts = cell_rule(geo, 4).points
            np.testing.assert_allclose(r.evaluate(d, pts), a + b * pts[:, 0] + c * pts[:, 1], atol=1e-13)
            np.testing.assert_allclose(r.evaluate(np.full(len(d), 4.0), pts), 4.0, atol=1e-13)

    def test_kind_strings(self):
        assert ReconstructionKind("ls") is ReconstructionKind.LEAST_SQUARES
        with pytest.raises(ValueError):
            build_reconstruction(SQUARE, "spline")


class TestEdgeProjectors:
    def test_p0_examples(self):
        P = project_P0_E(SQUARE)
        np.testing.assert_allclose(P.matrix @ _cell_fluxes(SQUARE, lambda p: np.tile([1.0, 0.0], (len(p), 1))), [1, 0], atol=1e-15)
        np.testing.assert_allclose(P.matrix @ _cell_fluxes(SQUARE, lambda p: p), [0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_p0_of_rot_of_linear(self, mesh):
        # rot(2x - 3y) = (-3, -2)
        for c, geo in enumerate(mesh.geometry):
            phi = 2 * geo.vertices[:, 0] - 3 * geo.vertices[:, 1]
            flux = (np.roll(phi, -1) - phi) / geo.edge_lengths
            np.testing.assert_allclose(project_P0_E(geo).matrix @ flux, [-3, -2], atol=1e-12)

    def test_rt_examples(self):
        R = project_RT(SQUARE)
        np.testing.assert_allclose(R.matrix @ _cell_fluxes(SQUARE, lambda p: p), [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(R.matrix @ _cell_fluxes(SQUARE, lambda p: np.tile([1.0, 0.0], (len(p), 1))), [1, 0, 0], atol=1e-15)

    @settings(max_examples=25, deadline=None)
    @given(coef=st.lists(st.floats(-3, 3), min_size=3, max_size=3), which=st.integers(0, len(MESHES) - 1))
    def test_rt_reproduces_rt0_members(self, coef, which):
        a, b, c = coef
        field = lambda p: np.array([a, b]) + c * p  # noqa: E731
        for geo in MESHES[which].geometry:
            got = project_RT(geo).matrix @ _cell_fluxes(geo, field)
            np.testing.assert_allclose(got, coef, atol=1e-12 * (1 + np.abs(coef).max()))

    @pytest.mark.parametrize("mesh", MESHES, ids=lambda m: m.name)
    def test_signs_follow_global_orientation(self, mesh):
        # DOFs in global orientation with cell signs equal the outward fluxes
        for c, geo in enumerate(mesh.geometry):
            gn = mesh.edge_normals[mesh.cell_edges[c]]
            dofs = gn @ np.array([0.3, -1.2]) + np.einsum("ij,ij->i", geo.edge_midpoints, gn) * 0.7
            got = project_RT(geo, mesh.cell_edge_signs[c]).matrix @ dofs
            np.testing.assert_allclose(got, [0.3, -1.2, 0.7], atol=1e-12)

    @pytest.mark.parametrize("rect", [(0, 1, 0, 1), (-0.3, 1.7, 0.2, 0.9)])
    def test_dense_oracle_for_divergence_free_member(self, rect):
        # C = rot(xy) = (x, -y) has constant normal traces on axis-aligned edges and zero div and rot
        x0, x1, y0, y1 = rect
        geo = gen_single_cell([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]).geometry[0]
        field = lambda p: np.column_stack([p[:, 0], -p[:, 1]])  # noqa: E731
        pts, w = tensor_gauss(*rect)
        got = project_RT(geo).matrix @ _cell_fluxes(geo, field)
        np.testing.assert_allclose(got, dense_rt_projection(field, pts, w), atol=1e-12)
        np.testing.assert_allclose(project_P0_E(geo).matrix @ _cell_fluxes(geo, field), (w @ field(pts)) / w.sum(), atol=1e-12)
        # orthogonality of the residual against RT0 test fields
        a, b, c = got
        resid = field(pts) - (np.array([a, b]) + c * pts)
        for q in (np.tile([1.0, 0.0], (len(pts), 1)), np.tile([0.0, 1.0], (len(pts), 1)), pts):
            assert abs(w @ (resid * q).sum(axis=1)) <= 1e-12

    def test_x_squared_sees_only_its_dofs(self):
        # (x^2, 0) has the same unit-square DOFs as the virtual member (x, 0)
        pts, w = tensor_gauss(0, 1, 0, 1)
        dofs = _cell_fluxes(SQUARE, lambda p: np.column_stack([p[:, 0] ** 2, 0 * p[:, 0]]))
        np.testing.assert_allclose(dofs, _cell_fluxes(SQUARE, lambda p: np.column_stack([p[:, 0], 0 * p[:, 0]])), atol=1e-15)
        got = project_RT(SQUARE).matrix @ dofs
        ref = dense_rt_projection(lambda p: np.column_stack([p[:, 0], 0 * p[:, 0]]), pts, w)
        np.testing.assert_allclose(got, ref, atol=1e-12)

    def test_evaluation_matrices_match_evaluate(self):
        geo = MESHES[4].geometry[3]
        P = project_RT(geo)
        d = np.random.default_rng(2).standard_normal(geo.n_vertices)
        pts = cell_rule(geo, 2).points
        Ex, Ey = P.evaluation_matrices(pts)
        np.testing.assert_allclose(np.column_stack([Ex @ d, Ey @ d]), P.evaluate(d, pts), atol=1e-14)
