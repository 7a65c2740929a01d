"""Property suites runnable from the command line.

Each suite returns a list of :class:`CheckResult`; a suite passes when every
entry passes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..derham import chain_maps, commuting_check_div, commuting_check_rot
from ..fluid import infsup_probe
from ..krylov import forcing_sequence, gmres_solve
from ..mesh import gen_center_refined, gen_perturbed_quads, gen_triangular, gen_voronoi
from ..polyquad import ScaledMonomialBasis, monomial_gram
from ..products import EMOperators
from ..solver import EMProblem, ResidualEvaluator, SolverConfig, initial_state, newton_step_loop, run

__all__ = ["CheckResult", "SUITES", "run_suite", "small_meshes"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} (threshold {self.threshold:.1e})"


def small_meshes():
    """Two sizes of every generator."""
    return [
        gen_triangular(4),
        gen_triangular(8),
        gen_perturbed_quads(4, 0.2, seed=1),
        gen_perturbed_quads(8, 0.2, seed=1),
        gen_voronoi(16, seed=1),
        gen_voronoi(64, seed=1),
        gen_center_refined(1),
        gen_center_refined(2),
    ]


def _le(name, value, threshold):
    return CheckResult(name, bool(value <= threshold), float(value), float(threshold))


def suite_derham() -> list[CheckResult]:
    import sympy

    x, y = sympy.symbols("x y")
    out = []
    for m in small_meshes():
        cm = chain_maps(m)
        out.append(_le(f"div*rot = 0 on {m.name}", cm.exactness_defect(), 1e-14))
        if m.n_vertices + m.n_edges + m.n_cells <= 200:
            rR = np.linalg.matrix_rank(cm.R.toarray())
            rD = np.linalg.matrix_rank(cm.D.toarray())
            gap = abs(rR - (m.n_vertices - 1)) + abs((m.n_edges - rD) - rR)
            out.append(_le(f"image rot = kernel div on {m.name}", gap, 0))
        out.append(_le(f"rot commutes (x^2 y) on {m.name}", commuting_check_rot(x**2 * y, m), 1e-12))
        out.append(_le(f"div commutes ((x,y)) on {m.name}", commuting_check_div((x, y), m), 1e-12))
    return out


def suite_products() -> list[CheckResult]:
    out = []
    for m in small_meshes():
        for kind in ("elliptic", "ls", "galerkin"):
            ops = EMOperators(m, kind)
            worst = 0.0
            for r, G in zip(ops.reconstructions, ops.grams_V):
                V = ScaledMonomialBasis.for_cell(r.geometry, 1).evaluate(r.geometry.vertices)
                exact = monomial_gram(r.geometry, 1)
                worst = max(worst, np.abs(V.T @ G.matrix @ V - exact).max() / np.abs(exact).max())
            out.append(_le(f"nodal linear consistency ({kind}) on {m.name}", worst, 1e-12))
            lam = np.linalg.eigvalsh(ops.M_V.toarray()).min()
            out.append(CheckResult(f"nodal Gram SPD ({kind}) on {m.name}", bool(lam > 0), float(lam), 0.0))
        ops = EMOperators(m)
        worst = 0.0
        rng = np.random.default_rng(0)
        for c, (geo, G) in enumerate(zip(m.geometry, ops.grams_E)):
            nrm = m.edge_normals[m.cell_edges[c]]
            mid = m.edge_midpoints[m.cell_edges[c]]
            a, k = rng.standard_normal(2), rng.standard_normal()
            # flux DOFs of the field a + k (x, y): its normal trace is constant per edge
            dofs_f = nrm @ a + k * np.einsum("ij,ij->i", mid, nrm)
            for cvec in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
                exact = cvec @ (a * geo.area + k * geo.area * geo.centroid)
                val = dofs_f @ G.matrix @ (nrm @ cvec)
                worst = max(worst, abs(val - exact) / geo.area)
        out.append(_le(f"edge constant consistency on {m.name}", worst, 1e-12))
        lam = np.linalg.eigvalsh(ops.M_E.toarray()).min()
        out.append(CheckResult(f"edge Gram SPD on {m.name}", bool(lam > 0), float(lam), 0.0))
    return out


def infsup_table(ns=(2, 4, 8)) -> list[tuple[int, float]]:
    return [(n, infsup_probe(gen_triangular(n)).beta) for n in ns]


def suite_infsup(table=None) -> list[CheckResult]:
    table = infsup_table() if table is None else table
    betas = np.array([b for _, b in table])
    out = [CheckResult(f"beta_h > 0 at n={n}", bool(b > 0), b, 0.0) for n, b in table]
    out.append(_le("beta_h variation max/min", betas.max() / betas.min(), 2.0))
    return out


def _bump_problem(n=6, theta=0.5, dt=0.01):
    m = gen_triangular(n)
    ops = EMOperators(m)
    prob = EMProblem(ops)
    V = m.vertices
    phi = np.cos(0.5 * np.pi * V[:, 0]) ** 2 * np.cos(0.5 * np.pi * V[:, 1]) ** 2
    B0 = ops.R @ phi
    return prob, SolverConfig(theta=theta, dt=dt), initial_state(prob, B0)


def suite_energy() -> list[CheckResult]:
    prob, cfg, st = _bump_problem()
    _, recs = run(prob, cfg, st, 20)
    energies = [0.5 * float(st.B @ (prob.ops.M_E @ st.B))] + [r.energy for r in recs]
    worst = max(np.diff(energies))
    return [_le("energy increase per step (u=0, theta=1/2)", worst, 1e-13)]


def suite_newton() -> list[CheckResult]:
    out = []
    m = gen_triangular(4)
    ops = EMOperators(m)
    prob = EMProblem(ops, velocity=lambda X, Y, t: (-X, Y))
    V = m.vertices
    B0 = ops.R @ np.log(np.cosh(V[:, 1]))
    cfg = SolverConfig(dt=0.01)
    st = initial_state(prob, B0)
    worst_div, worst_iters = 0.0, 0
    for _ in range(5):
        st, rec = newton_step_loop(prob, cfg, st)
        worst_iters = max(worst_iters, rec.newton.iterations)
        worst_div = max([worst_div] + rec.newton.divergence_defects)
    out.append(_le("Newton iterations on the affine residual", worst_iters, 1))
    out.append(_le("Newton-step divergence identity", worst_div, 1e-12))
    # a run started from the conservative first forcing term takes several iterations
    cfg08 = SolverConfig(dt=0.01, eta0=0.8)
    _, rec = newton_step_loop(prob, cfg08, st)
    lg = rec.newton
    etas = forcing_sequence(lg.residual_norms[: len(lg.etas)], lg.eps_t, cfg08.forcing)
    out.append(_le("logged Newton iterations with eta0 = 0.8 (informative)", lg.iterations, cfg08.max_newton))
    out.append(_le("forcing terms match closed form", max(abs(a - b) for a, b in zip(etas, lg.etas)), 0.0))
    ev = ResidualEvaluator(prob, cfg, st)
    J = ev.jacobian()
    rhs = -ev(ev.initial_guess())
    res = gmres_solve(lambda v: J @ v, rhs, 1e-12)
    direct = np.linalg.solve(J.toarray(), rhs)
    out.append(_le("GMRES vs dense solve", np.abs(res.x - direct).max() / np.abs(direct).max(), 1e-8))
    return out


SUITES: dict[str, Callable[[], list[CheckResult]]] = {
    "derham": suite_derham,
    "products": suite_products,
    "infsup": suite_infsup,
    "energy": suite_energy,
    "newton": suite_newton,
}


def run_suite(name: str) -> list[CheckResult]:
    try:
        return SUITES[name]()
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
