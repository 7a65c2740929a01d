"""Theta-scheme time stepping for the electromagnetic subsystem.

Unknowns per step are the new magnetic fluxes ``B^{n+1}`` on every edge and
the electric field ``E^{n+theta}`` on interior vertices; boundary values of
``E`` are prescribed.  The residual is

    G_F = theta/Rm * M_E [ (B - B^n)/dt + R E ]
    G_O = [ M_V E + K(u) B_theta - Rm^{-1} R^T M_E B_theta ]_interior

with ``B_theta = (1 - theta) B^n + theta B`` and ``K(u) B`` the nodal Gram
applied to the vertex values of ``u x PiRT B``.  The Faraday rows carry the
``theta/Rm`` factor so that the coupling blocks are (skew-)adjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .derham import as_callable
from .krylov import ForcingParams, NewtonLog, newton_solve
from .products import EMOperators

__all__ = [
    "SolverConfig",
    "EMState",
    "EMProblem",
    "ResidualEvaluator",
    "StepRecord",
    "coupling_term",
    "residual_G",
    "jacobian_action",
    "newton_step_loop",
    "time_step",
    "run",
    "divergence_of_step",
    "energy_diagnostic",
    "augmented_operator",
    "initial_state",
    "velocity_from",
    "current_density_norm",
]


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping and Newton-Krylov parameters.

    ``eps_a`` defaults to ``sqrt(n_unknowns) * 1e-15``.  ``eta0`` is the first
    forcing term before the safeguard; ``None`` means zero.
    ``faraday_completion`` rebuilds the magnetic part of each correction
    from the discrete Faraday law after GMRES, which keeps the divergence
    identity exact under inexact linear solves.
    """

    theta: float = 0.5
    dt: float = 1e-3
    T: float = 0.25
    rm: float = 1.0
    fd_eps: float = 1e-7
    eps_r: float = 1e-4
    eps_a: float | None = None
    alpha: float = 1.5
    gamma: float = 0.9
    eta_max: float = 0.8
    eta0: float | None = None
    gmres_max_iter: int | None = None
    max_newton: int = 25
    faraday_completion: bool = True
    augmented: bool = False

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        for name in ("dt", "rm", "fd_eps", "eps_r", "alpha", "gamma", "eta_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.T < 0:
            raise ValueError("T must be non-negative")
        if self.eps_a is not None and self.eps_a <= 0:
            raise ValueError("eps_a must be positive")

    @property
    def forcing(self) -> ForcingParams:
        return ForcingParams(self.alpha, self.gamma, self.eta_max, self.eta0)

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))


@dataclass(frozen=True)
class EMState:
    """Magnetic fluxes, vertex electric field (staggered time ``t - (1 - theta) dt``), and time."""

    B: np.ndarray
    E: np.ndarray
    t: float


@dataclass
class EMProblem:
    """Operators plus data: velocity ``u(x, y, t) -> (ux, uy)`` and boundary field ``E_b(x, y, t)``.

    ``None`` for either means zero.
    """

    ops: EMOperators
    velocity: Callable | None = None
    boundary_E: Callable | None = None
    velocity_is_steady: bool = True
    _K_cache: dict = field(default_factory=dict, repr=False)

    @property
    def mesh(self):
        return self.ops.mesh

    def velocity_at(self, t: float) -> tuple[np.ndarray, np.ndarray]:
        v = self.mesh.vertices
        if self.velocity is None:
            z = np.zeros(len(v))
            return z, z.copy()
        out = self.velocity(v[:, 0], v[:, 1], t)
        ux, uy = (np.broadcast_to(np.asarray(c, dtype=float), (len(v),)) for c in out)
        return ux, uy

    def cross_matrix(self, t: float) -> sp.csr_matrix:
        key = 0.0 if self.velocity_is_steady else float(t)
        K = self._K_cache.get(key)
        if K is None:
            if self.velocity is None:
                K = sp.csr_matrix((self.mesh.n_vertices, self.mesh.n_edges))
            else:
                K = self.ops.cross_operator(*self.velocity_at(t))
            if not self.velocity_is_steady:
                self._K_cache.clear()  # keep only the latest time level
            self._K_cache[key] = K
        return K

    def boundary_values(self, t: float) -> np.ndarray:
        m = self.mesh
        bidx = np.flatnonzero(m.boundary_vertex_flags)
        if self.boundary_E is None:
            return np.zeros(len(bidx))
        v = m.vertices[bidx]
        return np.broadcast_to(np.asarray(self.boundary_E(v[:, 0], v[:, 1], t), dtype=float), (len(bidx),)).copy()


def coupling_term(ops: EMOperators, ux, uy, B) -> np.ndarray:
    """``<I(u x PiRT B), D>_V`` for every nodal basis function ``D``."""
    return ops.cross_operator(np.asarray(ux, float), np.asarray(uy, float)) @ np.asarray(B, float)


class ResidualEvaluator:
    """Residual of one theta-scheme step, frozen on the previous state."""

    def __init__(self, problem: EMProblem, config: SolverConfig, prev: EMState):
        self.problem = problem
        self.config = config
        self.prev = prev
        ops = problem.ops
        m = ops.mesh
        self.ops = ops
        self.interior = m.interior_vertices
        self.boundary = np.flatnonzero(m.boundary_vertex_flags)
        self.nE = m.n_edges
        self.nV = m.n_vertices
        th = config.theta
        self.t_theta = prev.t + th * config.dt
        self.E_b = problem.boundary_values(self.t_theta)
        self.K = problem.cross_matrix(self.t_theta)
        self.M_E = ops.M_E
        self.M_V = ops.M_V
        self.R = ops.R
        self.RtME = (ops.R.T @ ops.M_E).tocsr()
        self.ohm_B = (self.K - self.RtME / config.rm).tocsr()[self.interior]
        self.M_V_int = ops.M_V[self.interior]
        if config.augmented:
            self.aug = (ops.D.T @ ops.M_P @ ops.D).tocsr()

    @property
    def size(self) -> int:
        return self.nE + len(self.interior)

    def split(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.size,):
            raise ValueError(f"expected {self.size} unknowns, got shape {x.shape}")
        return x[: self.nE], x[self.nE :]

    def full_E(self, E_int) -> np.ndarray:
        E = np.empty(self.nV)
        E[self.interior] = E_int
        E[self.boundary] = self.E_b
        return E

    def pack(self, B, E_full) -> np.ndarray:
        return np.concatenate([np.asarray(B, float), np.asarray(E_full, float)[self.interior]])

    def initial_guess(self) -> np.ndarray:
        return self.pack(self.prev.B, self.prev.E)

    def __call__(self, x) -> np.ndarray:
        cfg = self.config
        B, E_int = self.split(x)
        E = self.full_E(E_int)
        Bn = self.prev.B
        scale = cfg.theta / cfg.rm
        gF = scale * (self.M_E @ ((B - Bn) / cfg.dt + self.R @ E))
        if cfg.augmented:
            gF = gF + scale * (self.aug @ B)
        Bth = (1.0 - cfg.theta) * Bn + cfg.theta * B
        gO = self.M_V_int @ E + self.ohm_B @ Bth
        return np.concatenate([gF, gO])

    def jacobian(self) -> sp.csr_matrix:
        """Exact (assembled) Jacobian of the affine residual."""
        cfg = self.config
        scale = cfg.theta / cfg.rm
        FB = scale / cfg.dt * self.M_E
        if cfg.augmented:
            FB = FB + scale * self.aug
        FE = scale * (self.M_E @ self.R)[:, self.interior]
        OB = cfg.theta * self.ohm_B
        OE = self.M_V_int[:, self.interior]
        return sp.bmat([[FB, FE], [OB, OE]], format="csr")

    def complete_step(self, x, dx) -> np.ndarray:
        """Replace the flux correction by the one solving the Faraday rows exactly."""
        cfg = self.config
        B, E_int = self.split(x)
        dE = dx[self.nE :]
        E_new = self.full_E(E_int + dE)
        B_new = self.prev.B - cfg.dt * (self.R @ E_new)
        out = dx.copy()
        out[: self.nE] = B_new - B
        return out


def residual_G(x, evaluator: ResidualEvaluator) -> np.ndarray:
    return evaluator(x)


def jacobian_action(x, dx, evaluator: ResidualEvaluator, eps: float | None = None) -> np.ndarray:
    """Forward-difference directional derivative ``(G(x + eps dx) - G(x)) / eps``."""
    eps = evaluator.config.fd_eps if eps is None else eps
    return (evaluator(np.asarray(x) + eps * np.asarray(dx)) - evaluator(x)) / eps


def divergence_of_step(ops: EMOperators, B, dB, prev_B) -> float:
    """``max |div dB - div(B^n - B)|``."""
    return float(np.abs(ops.D @ np.asarray(dB) - ops.D @ (np.asarray(prev_B) - np.asarray(B))).max())


@dataclass
class StepRecord:
    t: float
    newton: NewtonLog
    div_norm: float
    B_norm: float
    energy: float


def newton_step_loop(problem: EMProblem, config: SolverConfig, state: EMState) -> tuple[EMState, StepRecord]:
    """Advance one time step by Jacobian-free Newton-Krylov."""
    ev = ResidualEvaluator(problem, config, state)
    ops = problem.ops
    nE = ev.nE
    defects: list[float] = []
    B_scale = max(ops.norm_E(state.B), 1e-300)

    def observe(x, dx):
        defects.append(divergence_of_step(ops, x[:nE], dx[:nE], state.B) / B_scale)

    x, log = newton_solve(
        ev,
        ev.initial_guess(),
        fd_eps=config.fd_eps,
        eps_r=config.eps_r,
        eps_a=config.eps_a,
        forcing=config.forcing,
        max_newton=config.max_newton,
        gmres_max_iter=config.gmres_max_iter,
        complete_step=ev.complete_step if config.faraday_completion else None,
        on_step=observe,
    )
    log.divergence_defects = defects
    B, E_int = ev.split(x)
    new = EMState(B.copy(), ev.full_E(E_int), state.t + config.dt)
    rec = StepRecord(
        t=new.t,
        newton=log,
        div_norm=ops.norm_P(ops.D @ B),
        B_norm=ops.norm_E(B),
        energy=0.5 / config.rm * float(B @ (ops.M_E @ B)),
    )
    return new, rec


time_step = newton_step_loop


def run(
    problem: EMProblem,
    config: SolverConfig,
    state: EMState,
    n_steps: int | None = None,
    callback: Callable[[EMState, StepRecord], None] | None = None,
) -> tuple[EMState, list[StepRecord]]:
    """Take ``n_steps`` steps (default ``config.n_steps``)."""
    n_steps = config.n_steps if n_steps is None else n_steps
    records = []
    for _ in range(n_steps):
        state, rec = newton_step_loop(problem, config, state)
        records.append(rec)
        if callback is not None:
            callback(state, rec)
    return state, records


def current_density_norm(problem: EMProblem, state: EMState, t: float | None = None) -> float:
    """``|E + I(u x PiRT B)|_V`` with cell-wise vertex values of the cross product."""
    ops = problem.ops
    m = ops.mesh
    t = state.t if t is None else t
    ux, uy = problem.velocity_at(t)
    total = 0.0
    for c, (proj, G) in enumerate(zip(ops.rt_projectors, ops.grams_V)):
        loop = m.cells[c]
        Bx, By = proj.evaluation_matrices(m.vertices[loop])
        bl = state.B[m.cell_edges[c]]
        j = state.E[loop] + ux[loop] * (By @ bl) - uy[loop] * (Bx @ bl)
        total += float(j @ G.matrix @ j)
    return math.sqrt(max(total, 0.0))


def energy_diagnostic(problem: EMProblem, states, rm: float = 1.0) -> list[tuple[float, float, float]]:
    """``(t, <B,B>_E / (2 Rm), |J|_V)`` for each state."""
    ops = problem.ops
    return [
        (s.t, 0.5 / rm * float(s.B @ (ops.M_E @ s.B)), current_density_norm(problem, s))
        for s in states
    ]


def augmented_operator(config: SolverConfig, on: bool = True) -> SolverConfig:
    """Config with the div-div augmentation switched on or off.

    The augmented residual adds ``theta/Rm <div B, div C>_P`` to the Faraday
    rows.  The Faraday completion is disabled alongside so that the
    augmentation, not the completion, controls the divergence.
    """
    return replace(config, augmented=on, faraday_completion=not on and config.faraday_completion)


def initial_state(problem: EMProblem, B0, E0=None, t0: float = 0.0) -> EMState:
    """State from initial fluxes; ``E`` defaults to zero inside and boundary data on the boundary."""
    m = problem.mesh
    E = np.zeros(m.n_vertices) if E0 is None else np.asarray(E0, dtype=float).copy()
    if E0 is None and problem.boundary_E is not None:
        E[m.boundary_vertex_flags] = problem.boundary_values(t0)
    return EMState(np.asarray(B0, dtype=float).copy(), E, t0)


def velocity_from(u) -> Callable | None:
    """Wrap a steady field ``u(x, y) -> (ux, uy)`` (callable or sympy pair) as ``u(x, y, t)``."""
    if u is None:
        return None
    if isinstance(u, (tuple, list)):
        fx, fy = as_callable(u[0]), as_callable(u[1])
        return lambda x, y, t: (fx(x, y), fy(x, y))
    return lambda x, y, t: u(x, y)
