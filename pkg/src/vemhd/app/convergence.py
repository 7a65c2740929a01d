"""Convergence study against the manufactured solution.

Each level ``n`` uses nominal mesh size ``h = 2/n`` and time step
``dt = T / ceil(T / (c h^2))``.  Errors are reported two ways:

* ``err_E_rel`` / ``err_B_rel``: broken L2 distance between the exact field
  and the cell-wise reconstruction of the discrete one (nodal reconstruction
  for ``E``, Raviart-Thomas projection for ``B``), relative to the exact field;
* ``err_E_disc`` / ``err_B_disc``: discrete nodal / edge norms of the
  difference between the interpolated exact field and the discrete one.

``E`` is compared at the staggered time ``T - (1 - theta) dt`` at which it
is computed.
"""
from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from ..mesh import generate
from ..polyquad import cell_rule
from ..products import EMOperators
from ..solver import EMProblem, SolverConfig, initial_state, run
from .export import export_csv
from .manufactured import ManufacturedSolution

__all__ = ["ExperimentConfig", "run_level", "run_convergence", "COLUMNS", "worker_count"]

COLUMNS = [
    "mesh_kind",
    "projector",
    "n",
    "h",
    "h_max",
    "steps",
    "dt",
    "err_E_rel",
    "err_B_rel",
    "eoc_E",
    "eoc_B",
    "err_E_disc",
    "err_B_disc",
    "eoc_E_disc",
    "eoc_B_disc",
    "div_max",
    "newton_max",
    "gmres_max",
    "seconds",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """Mesh family, refinement levels (``n = base_n * 2**i``), projector and time stepping."""

    mesh_kind: str = "tri"
    levels: int = 4
    projector: str = "elliptic"
    theta: float = 0.5
    dt_c: float = 0.05
    T: float = 0.25
    base_n: int = 4
    seed: int = 0
    n_steps: int | None = None

    def __post_init__(self):
        if self.levels < 1:
            raise ValueError("levels must be at least 1")

    @property
    def ns(self) -> list[int]:
        return [self.base_n * 2**i for i in range(self.levels)]


def worker_count(requested: int | None = None) -> int:
    """Worker processes, capped by ``VEMHD_THREADS`` (default 1)."""
    cap = int(os.environ.get("VEMHD_THREADS", "1") or 1)
    n = cap if requested is None else min(requested, cap)
    return max(1, n)


def _l2_errors(ops: EMOperators, ms: ManufacturedSolution, E, B, tE, tB):
    m = ops.mesh
    eE = nE = eB = nB = 0.0
    for c, geo in enumerate(m.geometry):
        rule = cell_rule(geo, 6)
        p = rule.points
        Ex = ms.E(p[:, 0], p[:, 1], tE)
        Eh = ops.reconstructions[c].evaluate(E[m.cells[c]], p)
        eE += rule.integrate((Ex - Eh) ** 2)
        nE += rule.integrate(Ex**2)
        Bx = ms.B(p[:, 0], p[:, 1], tB)
        Bh = ops.rt_projectors[c].evaluate(B[m.cell_edges[c]], p)
        eB += rule.integrate(((Bx - Bh) ** 2).sum(axis=1))
        nB += rule.integrate((Bx**2).sum(axis=1))
    return math.sqrt(eE / nE), math.sqrt(eB / nB)


def run_level(config: ExperimentConfig, n: int) -> dict:
    """Solve on one mesh and return a table row (without EOC columns)."""
    start = time.perf_counter()
    ms = ManufacturedSolution()
    ms.self_test()
    mesh = generate(config.mesh_kind, n, seed=config.seed)
    ops = EMOperators(mesh, config.projector)
    h = 2.0 / n
    steps = max(1, math.ceil(config.T / (config.dt_c * h * h)))
    dt = config.T / steps
    if config.n_steps is not None:
        steps = config.n_steps
    cfg = SolverConfig(theta=config.theta, dt=dt, T=steps * dt)
    problem = EMProblem(
        ops,
        velocity=lambda X, Y, t: ms.u(X, Y),
        boundary_E=lambda X, Y, t: ms.E(X, Y, t),
    )
    V = mesh.vertices
    # B0 = rot E0 exactly, so its flux interpolant is R applied to nodal E0
    B0 = ops.R @ ms.E(V[:, 0], V[:, 1], 0.0)
    state = initial_state(problem, B0)
    state, records = run(problem, cfg, state, steps)
    if steps == 0:
        E_h = ms.E(V[:, 0], V[:, 1], 0.0)
        tE = 0.0
    else:
        E_h = state.E
        tE = state.t - (1.0 - config.theta) * dt
    tB = state.t
    err_E, err_B = _l2_errors(ops, ms, E_h, state.B, tE, tB)
    E_int = ms.E(V[:, 0], V[:, 1], tE)
    B_int = ops.R @ ms.E(V[:, 0], V[:, 1], tB)
    div0 = ops.norm_P(ops.D @ B0) / ops.norm_E(B0)
    return {
        "mesh_kind": config.mesh_kind,
        "projector": config.projector,
        "n": n,
        "h": h,
        "h_max": mesh.h,
        "steps": steps,
        "dt": dt,
        "err_E_rel": err_E,
        "err_B_rel": err_B,
        "err_E_disc": ops.norm_V(E_int - E_h) / ops.norm_V(E_int),
        "err_B_disc": ops.norm_E(B_int - state.B) / ops.norm_E(B_int),
        "div_max": max([div0] + [r.div_norm / r.B_norm for r in records]),
        "newton_max": max([0] + [r.newton.iterations for r in records]),
        "gmres_max": max([0] + [max(r.newton.gmres_iterations, default=0) for r in records]),
        "seconds": time.perf_counter() - start,
    }


def _add_eoc(rows: list[dict]) -> list[dict]:
    for i, r in enumerate(rows):
        for key, col in (("err_E_rel", "eoc_E"), ("err_B_rel", "eoc_B"), ("err_E_disc", "eoc_E_disc"), ("err_B_disc", "eoc_B_disc")):
            if i == 0:
                r[col] = float("nan")
            else:
                prev = rows[i - 1]
                r[col] = math.log(prev[key] / r[key]) / math.log(prev["h"] / r["h"])
    return rows


def run_convergence(config: ExperimentConfig, out=None, workers: int | None = None) -> list[dict]:
    """Run every level and return rows with EOC columns; optionally write CSV.

    If a level fails, the rows completed so far are written before the error
    propagates.
    """
    nw = min(worker_count(workers), len(config.ns))
    rows: list[dict] = []
    try:
        if nw > 1:
            with ProcessPoolExecutor(max_workers=nw) as pool:
                for row in pool.map(run_level, [config] * len(config.ns), config.ns):
                    rows.append(row)
        else:
            for n in config.ns:
                rows.append(run_level(config, n))
                if out is not None:
                    export_csv(_add_eoc([dict(r) for r in rows]), out, COLUMNS)
    finally:
        _add_eoc(rows)
        if out is not None:
            export_csv(rows, out, COLUMNS)
    return rows


def config_dict(config: ExperimentConfig) -> dict:
    return asdict(config)
