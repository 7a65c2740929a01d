"""Acceptance criteria, each run at its stated tolerance.

Every test prints one ``ACCEPTANCE PASS|FAIL`` line (collected again in the
terminal summary) before asserting.
"""
import math
import time

import numpy as np
import pytest
import sympy

from oracles import forcing_closed_form, green_moment, scaled_monomial_gram
from reporting import record_acceptance
from vemhd.app.checks import small_meshes
from vemhd.app.convergence import ExperimentConfig, run_convergence
from vemhd.app.reconnection import ReconnectionConfig, run_reconnection
from vemhd.derham import chain_maps, commuting_check_div, commuting_check_rot, interp_V
from vemhd.fluid import infsup_probe
from vemhd.krylov import gmres_solve
from vemhd.mesh import gen_center_refined, gen_perturbed_quads, gen_triangular, gen_voronoi
from vemhd.polyquad import ScaledMonomialBasis
from vemhd.products import EMOperators
from vemhd.solver import EMProblem, ResidualEvaluator, SolverConfig, initial_state, newton_step_loop, run

x, y = sympy.symbols("x y")
KINDS = ("elliptic", "ls", "galerkin")


@pytest.fixture(scope="module")
def convergence_runs():
    """Triangular studies for every projector plus Galerkin on Voronoi, single process."""
    runs = {}
    for mesh_kind, proj in [("tri", k) for k in KINDS] + [("voronoi", "galerkin")]:
        start = time.perf_counter()
        rows = run_convergence(ExperimentConfig(mesh_kind=mesh_kind, levels=4, projector=proj), workers=1)
        runs[(mesh_kind, proj)] = (rows, time.perf_counter() - start)
    return runs


def test_convergence_rates(convergence_runs):
    ok = True
    parts = []
    tri_seconds = 0.0
    for (mesh_kind, proj), (rows, secs) in convergence_runs.items():
        last = rows[-1]
        eE, eB = last["eoc_E"], last["eoc_B"]
        if mesh_kind == "tri":
            tri_seconds += secs
            good = 1.8 <= eE <= 2.3 and 0.85 <= eB <= 1.3
            parts.append(f"tri/{proj} EOC_E={eE:.3f} EOC_B={eB:.3f}")
        else:
            # only the magnetic rate is bounded for this pairing; the electric rate is reported
            good = 0.7 <= eB <= 1.3
            parts.append(f"voronoi/{proj} EOC_B={eB:.3f} (EOC_E={eE:.3f} informative)")
        parts[-1] += f" [disc E={last['eoc_E_disc']:.2f} B={last['eoc_B_disc']:.2f}]"
        ok &= good
    total = sum(s for _, s in convergence_runs.values())
    ok &= tri_seconds < 600
    record_acceptance(
        "convergence rates",
        ok,
        "; ".join(parts) + f"; triangular runtime {tri_seconds:.0f}s, all studies {total:.0f}s (limit 600s)",
    )
    assert ok


def test_divergence_free_evolution(convergence_runs):
    worst = max(r["div_max"] for rows, _ in convergence_runs.values() for r in rows)
    ok = worst <= 1e-12
    n_runs = sum(len(rows) for rows, _ in convergence_runs.values())
    record_acceptance("divergence-free evolution", ok, f"max_step |div B|_P/|B|_E = {worst:.2e} over {n_runs} runs (limit 1e-12)")
    assert ok


def test_de_rham_exactness():
    meshes = small_meshes()
    defect = max(chain_maps(m).exactness_defect() for m in meshes)
    rank_ok, n_rank = True, 0
    for m in meshes:
        if m.n_vertices + m.n_edges + m.n_cells > 200:
            continue
        cm = chain_maps(m)
        rR = np.linalg.matrix_rank(cm.R.toarray())
        rD = np.linalg.matrix_rank(cm.D.toarray())
        rank_ok &= rR == m.n_vertices - 1 and m.n_edges - rD == rR
        n_rank += 1
    ok = defect <= 1e-14 and rank_ok and n_rank >= 4
    names = ", ".join(m.name for m in meshes)
    record_acceptance(
        "de Rham exactness",
        ok,
        f"max |D R| = {defect:.1e} on {names} (limit 1e-14); image rot = kernel div by rank on {n_rank} meshes: {rank_ok}",
    )
    assert ok


def test_commuting_diagrams():
    meshes = small_meshes()
    poly = 0.0
    for m in meshes:
        poly = max(
            poly,
            commuting_check_rot(x**3 * y - 2 * x * y**2 + 1, m),
            commuting_check_div((x**2 * y, y**3 - x), m),
            commuting_check_div((x, y), m),
        )
    # degree-8 rules held fixed while the mesh is refined: the defect falls to a roundoff floor
    families = {
        "tri": [gen_triangular(n) for n in (4, 8, 16)],
        "pquad": [gen_perturbed_quads(n, 0.2, seed=1) for n in (4, 8, 16)],
        "voronoi": [gen_voronoi(n, seed=1) for n in (16, 64, 256)],
        "refined": [gen_center_refined(lv) for lv in (1, 2, 3)],
    }
    plateau, coarse = {}, {}
    for name, ms in families.items():
        vals = [
            max(commuting_check_rot(sympy.sin(x * y), m, degree=8), commuting_check_div((sympy.cos(x * y), sympy.sin(x * y)), m, degree=8))
            for m in ms
        ]
        coarse[name], plateau[name] = vals[0], vals[-1]
    ok = poly <= 1e-12 and max(plateau.values()) <= 1e-12
    record_acceptance(
        "commuting diagrams",
        ok,
        f"polynomials {poly:.1e} (limit 1e-12); sin(xy) degree-8 floor under refinement "
        + ", ".join(f"{k} {v:.1e}" for k, v in plateau.items())
        + " (limit 1e-12); coarsest-level degree-8 values "
        + ", ".join(f"{k} {v:.1e}" for k, v in coarse.items()),
    )
    assert ok


def test_inner_product_consistency():
    worst_V, worst_E, spd = 0.0, 0.0, True
    rng = np.random.default_rng(0)
    for m in small_meshes():
        for kind in KINDS:
            ops = EMOperators(m, kind)
            for geo, G in zip(m.geometry, ops.grams_V):
                V = ScaledMonomialBasis.for_cell(geo, 1).evaluate(geo.vertices)
                exact = scaled_monomial_gram(geo.vertices, geo.centroid, geo.diameter, 1)
                worst_V = max(worst_V, np.abs(V.T @ G.matrix @ V - exact).max() / np.abs(exact).max())
            spd &= np.linalg.eigvalsh(ops.M_V.toarray()).min() > 0
        ops = EMOperators(m)
        for c, (geo, G) in enumerate(zip(m.geometry, ops.grams_E)):
            gn = m.edge_normals[m.cell_edges[c]]
            mid = m.edge_midpoints[m.cell_edges[c]]
            a, k = rng.standard_normal(2), rng.standard_normal()
            dofs = gn @ a + k * np.einsum("ij,ij->i", mid, gn)
            first = np.array([green_moment(geo.vertices, 1, 0), green_moment(geo.vertices, 0, 1)])
            for j in range(2):
                exact = a[j] * geo.area + k * first[j]
                scale = geo.area * (np.abs(a).max() + abs(k))
                worst_E = max(worst_E, abs(dofs @ G.matrix @ gn[:, j] - exact) / scale)
        spd &= np.linalg.eigvalsh(ops.M_E.toarray()).min() > 0
        spd &= bool(np.all(ops.M_P.diagonal() > 0))
    ok = worst_V <= 1e-12 and worst_E <= 1e-12 and spd
    record_acceptance(
        "inner-product consistency",
        ok,
        f"nodal linear {worst_V:.1e}, edge RT0-vs-constant {worst_E:.1e} (relative, limit 1e-12) on every cell; global Grams SPD: {spd}",
    )
    assert ok


def _newton_problem():
    m = gen_triangular(8)
    ops = EMOperators(m)
    prob = EMProblem(ops, velocity=lambda X, Y, t: (-Y, X), boundary_E=lambda X, Y, t: 0.1 * X * np.cos(t))
    phi = interp_V(m, sympy.sin(2 * x) * sympy.cosh(y) + x * y**2).values
    return prob, initial_state(prob, ops.R @ phi)


def test_newton_jfnk():
    prob, st = _newton_problem()
    cfg = SolverConfig(dt=0.01)
    iters, div = [], 0.0
    for _ in range(10):
        st, rec = newton_step_loop(prob, cfg, st)
        iters.append(rec.newton.iterations)
        div = max([div] + rec.newton.divergence_defects)
    # a logged run with several iterations, from the conservative first forcing term
    cfg08 = SolverConfig(dt=0.01, eta0=0.8)
    _, rec = newton_step_loop(prob, cfg08, st)
    lg = rec.newton
    closed = forcing_closed_form(lg.residual_norms[:-1], lg.eps_t, eta0=0.8)
    forcing_exact = lg.etas == closed and len(lg.etas) > 1
    ev = ResidualEvaluator(prob, cfg, st)
    J = ev.jacobian()
    rhs = -ev(ev.initial_guess())
    direct = np.linalg.solve(J.toarray(), rhs)
    got = gmres_solve(lambda v: J @ v, rhs, 1e-12).x
    gm = np.linalg.norm(got - direct) / np.linalg.norm(direct)
    ok = set(iters) == {1} and div <= 1e-12 and forcing_exact and gm <= 1e-8 and J.shape[0] <= 500
    record_acceptance(
        "Newton/JFNK",
        ok,
        f"iterations per step {sorted(set(iters))}; divergence identity {div:.1e} (limit 1e-12); "
        f"forcing terms exact over {len(lg.etas)} logged iterations: {forcing_exact}; "
        f"GMRES vs dense {gm:.1e} on {J.shape[0]} unknowns (limit 1e-8)",
    )
    assert ok


def test_energy_decay():
    worst = -math.inf
    names = []
    # decaying bumps, a steady uniform field, and a uniform field carrying a small bump
    cases = [
        (gen_voronoi(64, seed=1), (1 - x**2) * (1 - y**2) * sympy.exp(x - y)),
        (gen_center_refined(2), (1 - x**2) * (1 - y**2) * sympy.exp(x - y)),
        (gen_triangular(8), (1 - x**2) * (1 - y**2) * sympy.exp(x - y)),
        (gen_voronoi(64, seed=2), y),
        (gen_center_refined(2), y + 1e-6 * (1 - x**2) * (1 - y**2)),
    ]
    for m, potential in cases:
        ops = EMOperators(m)
        prob = EMProblem(ops)
        phi = interp_V(m, potential).values
        st = initial_state(prob, ops.R @ phi)
        e = [0.5 * float(st.B @ (ops.M_E @ st.B))]
        _, recs = run(prob, SolverConfig(dt=5e-3, theta=0.5), st, n_steps=20)
        e += [r.energy for r in recs]
        worst = max(worst, max(np.diff(e)))
        names.append(f"{m.name} {e[0]:.10g}->{e[-1]:.10g}")
    ok = worst <= 1e-13
    record_acceptance("energy decay", ok, f"largest per-step increase {worst:.1e} (limit 1e-13); " + ", ".join(names))
    assert ok


def test_infsup():
    betas = {n: infsup_probe(gen_triangular(n)).beta for n in (2, 4, 8)}
    var = max(betas.values()) / min(betas.values())
    ok = min(betas.values()) > 0 and var < 2
    record_acceptance(
        "fluid inf-sup",
        ok,
        ", ".join(f"beta(n={n})={b:.4f}" for n, b in betas.items()) + f"; max/min {var:.3f} (limit 2)",
    )
    assert ok


def test_reconnection_steady_state():
    cfg = ReconnectionConfig()
    res = run_reconnection(cfg)
    rep = res.report(cfg)
    ok = rep["ratio"] >= 10 and rep["div_max"] <= 1e-12 and rep["max_cell_vertices"] > 4
    record_acceptance(
        "reconnection steady state",
        ok,
        f"metric {rep['metric_early']:.4f} at t={cfg.early_time} -> {rep['metric_final']:.4f} at t={rep['final_time']:.3f}, "
        f"ratio {rep['ratio']:.2f} (need >= 10); div {rep['div_max']:.1e} (limit 1e-12); "
        f"{rep['cells']} cells with up to {rep['max_cell_vertices']} vertices; Rm={cfg.rm}, base {cfg.base}, levels {cfg.levels}",
    )
    assert ok
