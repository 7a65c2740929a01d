"""Matrix-free GMRES and an inexact Newton driver with Eisenstat-Walker forcing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "GMRESError",
    "NewtonError",
    "GMRESResult",
    "gmres_solve",
    "ForcingParams",
    "ForcingSchedule",
    "forcing_sequence",
    "NewtonLog",
    "newton_solve",
]


class GMRESError(RuntimeError):
    """GMRES failed to reach its tolerance; ``history`` holds residual norms."""

    def __init__(self, message: str, history):
        super().__init__(message)
        self.history = list(history)


class NewtonError(RuntimeError):
    """Newton iteration failed; ``trace`` holds the residual norms."""

    def __init__(self, message: str, trace):
        super().__init__(message)
        self.trace = list(trace)


@dataclass
class GMRESResult:
    x: np.ndarray
    residuals: list[float]
    iterations: int
    converged: bool


def _givens(a: float, b: float) -> tuple[float, float]:
    if b == 0.0:
        return 1.0, 0.0
    r = math.hypot(a, b)
    return a / r, b / r


def gmres_solve(
    action: Callable[[np.ndarray], np.ndarray],
    rhs: np.ndarray,
    tol: float,
    max_iter: int | None = None,
    stagnation: int = 50,
) -> GMRESResult:
    """Full (unrestarted) GMRES from a zero initial guess.

    Stops once ``||rhs - action(x)|| <= tol ||rhs||``.  Arnoldi uses modified
    Gram-Schmidt followed by one (block) reorthogonalization pass; the Krylov
    basis grows in chunks so small solves stay cheap.  If the residual
    estimate does not decrease for ``stagnation`` consecutive iterations a
    :class:`GMRESError` is raised.
    """
    b = np.asarray(rhs, dtype=float)
    n = len(b)
    beta = float(np.linalg.norm(b))
    history = [beta]
    if beta == 0.0:
        return GMRESResult(np.zeros(n), history, 0, True)
    if max_iter is None:
        max_iter = n
    max_iter = min(max_iter, n)
    target = tol * beta

    cap = min(max_iter, 64)
    V = np.zeros((cap + 1, n))
    H = np.zeros((cap + 1, cap))
    cs = np.zeros(max_iter)
    sn = np.zeros(max_iter)
    g = np.zeros(max_iter + 1)
    g[0] = beta
    V[0] = b / beta
    best, since_best = beta, 0
    k = 0
    converged = False
    for k in range(max_iter):
        if k + 1 > cap:
            cap = min(2 * cap, max_iter)
            V = np.vstack([V, np.zeros((cap + 1 - len(V), n))])
            H = np.pad(H, ((0, cap + 1 - H.shape[0]), (0, cap - H.shape[1])))
        # copy: the action may return its argument, and w is updated in place
        w = np.array(action(V[k]), dtype=float)
        # modified Gram-Schmidt, then one classical reorthogonalization pass
        for j in range(k + 1):
            hij = float(V[j] @ w)
            H[j, k] = hij
            w -= hij * V[j]
        corr = V[: k + 1] @ w
        w -= corr @ V[: k + 1]
        H[: k + 1, k] += corr
        hnext = float(np.linalg.norm(w))
        H[k + 1, k] = hnext
        for j in range(k):
            t = cs[j] * H[j, k] + sn[j] * H[j + 1, k]
            H[j + 1, k] = -sn[j] * H[j, k] + cs[j] * H[j + 1, k]
            H[j, k] = t
        cs[k], sn[k] = _givens(H[k, k], H[k + 1, k])
        H[k, k] = cs[k] * H[k, k] + sn[k] * H[k + 1, k]
        H[k + 1, k] = 0.0
        g[k + 1] = -sn[k] * g[k]
        g[k] = cs[k] * g[k]
        res = abs(g[k + 1])
        history.append(res)
        if res <= target:
            converged = True
            break
        if res < best * (1.0 - 1e-12):
            best, since_best = res, 0
        else:
            since_best += 1
            if since_best >= stagnation:
                raise GMRESError(f"GMRES stagnated at residual {res:.3e} after {k + 1} iterations", history)
        if hnext == 0.0:
            # invariant subspace: the least-squares solution is exact
            converged = True
            break
        V[k + 1] = w / hnext
    m = k + 1
    y = np.linalg.solve(np.triu(H[:m, :m]), g[:m]) if m else np.zeros(0)
    x = V[:m].T @ y
    if not converged:
        raise GMRESError(f"GMRES reached {m} iterations with residual {history[-1]:.3e}", history)
    return GMRESResult(x, history, m, converged)


@dataclass(frozen=True)
class ForcingParams:
    alpha: float = 1.5
    gamma: float = 0.9
    eta_max: float = 0.8
    eta0: float | None = None


class ForcingSchedule:
    """Eisenstat-Walker forcing terms.

    ``eta_A = gamma (|G_m| / |G_{m-1}|)^alpha``,
    ``eta_B = min(eta_max, max(eta_A, gamma eta_{m-1}^alpha))``,
    ``eta = min(eta_max, max(eta_B, gamma eps_t / |G_m|))``.

    With no history the first term is ``min(eta_max, max(eta0, gamma eps_t / |G_0|))``
    where ``eta0`` defaults to zero, so an affine residual is solved in one
    Newton iteration.
    """

    def __init__(self, params: ForcingParams, eps_t: float):
        self.p = params
        self.eps_t = float(eps_t)
        self.prev_norm: float | None = None
        self.prev_eta: float | None = None

    def next(self, gnorm: float) -> float:
        p = self.p
        safeguard = p.gamma * self.eps_t / gnorm if gnorm > 0 else p.eta_max
        if self.prev_norm is None:
            eta_b = 0.0 if p.eta0 is None else p.eta0
        else:
            eta_a = p.gamma * (gnorm / self.prev_norm) ** p.alpha
            eta_b = min(p.eta_max, max(eta_a, p.gamma * self.prev_eta**p.alpha))
        eta = min(p.eta_max, max(eta_b, safeguard))
        self.prev_norm, self.prev_eta = gnorm, eta
        return eta


def forcing_sequence(norms, eps_t: float, params: ForcingParams = ForcingParams()) -> list[float]:
    """Forcing terms generated by a given history of residual norms."""
    sched = ForcingSchedule(params, eps_t)
    return [sched.next(g) for g in norms]


@dataclass
class NewtonLog:
    residual_norms: list[float] = field(default_factory=list)
    etas: list[float] = field(default_factory=list)
    gmres_iterations: list[int] = field(default_factory=list)
    divergence_defects: list[float] = field(default_factory=list)
    eps_t: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.etas)


def newton_solve(
    G: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    *,
    fd_eps: float = 1e-7,
    eps_r: float = 1e-4,
    eps_a: float | None = None,
    forcing: ForcingParams = ForcingParams(),
    max_newton: int = 25,
    gmres_max_iter: int | None = None,
    complete_step: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None,
    on_step: Callable[[np.ndarray, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, NewtonLog]:
    """Jacobian-free inexact Newton iteration for ``G(x) = 0``.

    The Jacobian action is ``(G(x + eps v) - G(x)) / eps``.  Each correction
    solves ``J dx = -G`` by GMRES to relative tolerance ``eta_m``.
    ``complete_step(x, dx)`` may post-process the correction;
    ``on_step(x, dx)`` observes each accepted correction.
    """
    x = np.array(x0, dtype=float)
    if eps_a is None:
        eps_a = math.sqrt(len(x)) * 1e-15
    g = G(x)
    g0 = float(np.linalg.norm(g))
    log = NewtonLog(residual_norms=[g0])
    eps_t = eps_a + eps_r * g0
    log.eps_t = eps_t
    sched = ForcingSchedule(forcing, eps_t)
    gnorm = g0
    while gnorm >= eps_t:
        if log.iterations >= max_newton:
            raise NewtonError(f"Newton did not converge in {max_newton} iterations", log.residual_norms)
        eta = sched.next(gnorm)
        gx = g

        def jac(v, x=x, gx=gx):
            return (G(x + fd_eps * v) - gx) / fd_eps

        res = gmres_solve(jac, -gx, eta, gmres_max_iter)
        dx = res.x
        if complete_step is not None:
            dx = complete_step(x, dx)
        if on_step is not None:
            on_step(x, dx)
        x = x + dx
        g = G(x)
        gnorm = float(np.linalg.norm(g))
        log.etas.append(eta)
        log.gmres_iterations.append(res.iterations)
        log.residual_norms.append(gnorm)
    return x, log
