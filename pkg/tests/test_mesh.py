import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vemhd.mesh import (
    MeshError,
    MeshFormatError,
    PolyMesh,
    check_regularity,
    gen_center_refined,
    gen_perturbed_quads,
    gen_single_cell,
    gen_triangular,
    gen_voronoi,
    generate,
    read_mesh,
    write_mesh,
)


def _square_grid(n):
    xs = np.linspace(-1, 1, n + 1)
    verts = [[x, y] for y in xs for x in xs]
    cells = []
    for j in range(n):
        for i in range(n):
            a = j * (n + 1) + i
            cells.append([a, a + 1, a + n + 2, a + n + 1])
    return PolyMesh.from_cells(verts, cells)


ALL_GENERATORS = [
    lambda: gen_triangular(3),
    lambda: gen_perturbed_quads(5, 0.2, seed=3),
    lambda: gen_voronoi(20, seed=2),
    lambda: gen_center_refined(2),
]


class TestGeometry:
    def test_unit_square(self, unit_square):
        g = unit_square.geometry[0]
        assert g.area == pytest.approx(1.0, abs=1e-15)
        assert g.diameter == pytest.approx(math.sqrt(2), abs=1e-15)
        np.testing.assert_allclose(g.centroid, [0.5, 0.5], atol=1e-15)

    def test_bottom_edge(self, unit_square):
        m = unit_square
        e = next(i for i, (a, b) in enumerate(m.edges) if (a, b) == (0, 1))
        np.testing.assert_allclose(m.edge_normals[e], [0, -1], atol=1e-15)
        np.testing.assert_allclose(m.edge_tangents[e], [1, 0], atol=1e-15)
        assert m.edge_lengths[e] == 1.0
        np.testing.assert_allclose(m.edge_midpoints[e], [0.5, 0.0])

    def test_right_triangle(self):
        g = gen_single_cell([[0, 0], [1, 0], [0, 1]]).geometry[0]
        assert g.area == pytest.approx(0.5)
        assert g.diameter == pytest.approx(math.sqrt(2))

    @pytest.mark.parametrize("make", ALL_GENERATORS)
    def test_closed_polygons_and_unit_vectors(self, make):
        for g in make().geometry:
            np.testing.assert_allclose((g.edge_lengths[:, None] * g.normals).sum(axis=0), 0, atol=1e-14)
            np.testing.assert_allclose(np.linalg.norm(g.normals, axis=1), 1, atol=1e-14)
            np.testing.assert_allclose(g.normals, np.column_stack([g.tangents[:, 1], -g.tangents[:, 0]]))

    def test_degenerate_cell_names_the_cell(self):
        with pytest.raises(MeshError, match="cell 0"):
            PolyMesh.from_cells([[0, 0], [1, 0], [2, 0]], [[0, 1, 2]])

    def test_clockwise_cell_rejected(self):
        with pytest.raises(MeshError, match="cell 0"):
            PolyMesh.from_cells([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 3, 2, 1]])


class TestRegularity:
    def test_square_grid_satisfied(self):
        assert check_regularity(_square_grid(4), 0.2).satisfied

    def test_short_edge_flagged(self):
        h = 1e-3
        m = gen_single_cell([[0, 0], [1, 0], [1, 1], [1 - h * math.sqrt(2), 1], [0, 1]])
        rep = check_regularity(m, 0.1)
        assert not rep.satisfied
        assert list(rep.violating_edge) == [0]

    def test_voronoi_reports_without_raising(self):
        rep = check_regularity(gen_voronoi(30, seed=4), 0.2)
        assert 0 < rep.min_rho_edge <= 1
        assert 0 < rep.min_rho_star <= 1

    @pytest.mark.parametrize("n", [1, 2, 4, 8])
    def test_triangles_edge_ratio(self, n):
        assert check_regularity(gen_triangular(n)).min_rho_edge >= 0.4


class TestGenerators:
    def test_triangular_counts(self):
        m = gen_triangular(2)
        assert (m.n_cells, m.n_vertices) == (8, 9)
        assert m.extent == (-1.0, 1.0, -1.0, 1.0)

    def test_perturbed_quads_pin_boundary(self):
        m = gen_perturbed_quads(4, 0.2, seed=1)
        assert m.n_cells == 16
        ref = _square_grid(4).vertices
        b = m.boundary_vertex_flags
        np.testing.assert_array_equal(m.vertices[b], ref[b])
        assert not np.allclose(m.vertices[~b], ref[~b])

    def test_center_refined_has_hanging_nodes(self):
        m = gen_center_refined(2, 0.5)
        areas = m.cell_areas
        edge_cells = {}
        for c, ce in enumerate(m.cell_edges):
            for e in ce:
                edge_cells.setdefault(int(e), []).append(c)
        coarse_next_to_fine = 0
        for cs in edge_cells.values():
            if len(cs) == 2:
                a, b = cs
                for big, small in ((a, b), (b, a)):
                    if areas[big] > 1.5 * areas[small]:
                        coarse_next_to_fine += 1
                        assert len(m.cells[big]) >= 5
        assert coarse_next_to_fine > 0

    def test_center_refined_loops_contain_every_vertex_on_their_boundary(self):
        m = gen_center_refined(3)
        V = m.vertices
        for loop in m.cells:
            xy = V[loop]
            nxt = np.roll(xy, -1, axis=0)
            for k, p in enumerate(V):
                if k in loop:
                    continue
                d = nxt - xy
                cross = d[:, 0] * (p[1] - xy[:, 1]) - d[:, 1] * (p[0] - xy[:, 0])
                s = np.einsum("ij,ij->i", p - xy, d) / np.einsum("ij,ij->i", d, d)
                assert not np.any((np.abs(cross) < 1e-12) & (s > 1e-12) & (s < 1 - 1e-12))

    @pytest.mark.parametrize("make", ALL_GENERATORS)
    def test_areas_sum_to_domain(self, make):
        m = make()
        assert m.cell_areas.sum() == pytest.approx(4.0, rel=1e-12)

    @pytest.mark.parametrize("make", ALL_GENERATORS)
    def test_interior_edges_opposite_orientation(self, make):
        m = make()
        seen = np.zeros(m.n_edges, dtype=int)
        count = np.zeros(m.n_edges, dtype=int)
        for ce, cs in zip(m.cell_edges, m.cell_edge_signs):
            np.add.at(seen, ce, cs)
            np.add.at(count, ce, 1)
        assert set(count) <= {1, 2}
        assert np.all(seen[count == 2] == 0)
        np.testing.assert_array_equal(count == 1, m.boundary_edge_flags)

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 6))
    def test_seeded_generators_reproducible(self, seed, n):
        for kind in ("pquad", "voronoi"):
            a, b = generate(kind, n, seed=seed), generate(kind, n, seed=seed)
            np.testing.assert_array_equal(a.vertices, b.vertices)
            assert all(np.array_equal(x, y) for x, y in zip(a.cells, b.cells))
            assert a.cell_areas.sum() == pytest.approx(4.0, rel=1e-12)

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_invalid_parameters(self, bad):
        with pytest.raises(ValueError):
            gen_triangular(bad)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate("hex", 3)


class TestFileFormat:
    def test_round_trip(self, tmp_path):
        for m in (gen_triangular(2), gen_voronoi(12, seed=5), gen_center_refined(2)):
            path = tmp_path / f"{m.name}.mesh"
            write_mesh(m, path)
            r = read_mesh(path)
            np.testing.assert_array_equal(r.vertices, m.vertices)
            np.testing.assert_array_equal(r.edges, m.edges)
            assert all(np.array_equal(x, y) for x, y in zip(r.cells, m.cells))
            np.testing.assert_array_equal(r.boundary_edge_flags, m.boundary_edge_flags)

    def test_missing_cells_section(self, tmp_path):
        path = tmp_path / "bad.mesh"
        write_mesh(gen_triangular(1), path)
        text = path.read_text()
        path.write_text(text[: text.index("CELLS")])
        with pytest.raises(MeshFormatError, match="CELLS") as err:
            read_mesh(path)
        assert err.value.line is not None

    def test_bad_coordinate_reports_line(self, tmp_path):
        path = tmp_path / "bad.mesh"
        write_mesh(gen_triangular(1), path)
        lines = path.read_text().splitlines()
        lines[3] = "0.5 abc"
        path.write_text("\n".join(lines))
        with pytest.raises(MeshFormatError) as err:
            read_mesh(path)
        assert err.value.line == 4

    def test_edge_vertex_out_of_range(self, tmp_path):
        path = tmp_path / "bad.mesh"
        m = gen_triangular(1)
        write_mesh(m, path)
        lines = path.read_text().splitlines()
        k = lines.index("EDGES") + 2
        lines[k] = f"0 {m.n_vertices} 1"
        path.write_text("\n".join(lines))
        with pytest.raises(MeshError, match="out of range"):
            read_mesh(path)
