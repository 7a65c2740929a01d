"""Closed-form electromagnetic solution driven by a prescribed velocity.

With ``Rm = 1`` the fields satisfy ``dB/dt + rot E = 0``,
``E + u x B - rot B = 0`` and ``div B = 0``; in fact ``rot E = B`` and
``dB/dt = -B``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

__all__ = ["ManufacturedSolution", "ManufacturedSelfTestError"]


class ManufacturedSelfTestError(AssertionError):
    pass


x, y, t = sp.symbols("x y t", real=True)


@dataclass(frozen=True)
class ManufacturedSolution:
    rm: float = 1.0

    @cached_property
    def symbols(self):
        s, c = sp.sin(x * y), sp.cos(x * y)
        decay = sp.exp(-t)
        Bx = (50 * sp.exp(y) + x * s - x * c) * decay
        By = (50 * sp.exp(x) - y * s + y * c) * decay
        E = -(50 * (sp.exp(x) - sp.exp(y)) + c + s) * decay
        N = (x**2 + y**2 - 1) * (s + c) - 100 * sp.exp(x) + 100 * sp.exp(y)
        ux = -N / (2 * (50 * sp.exp(x) - y * s + y * c))
        uy = N / (2 * (50 * sp.exp(y) + x * s - x * c))
        return {"Bx": Bx, "By": By, "E": E, "ux": ux, "uy": uy}

    @cached_property
    def _numeric(self):
        s = self.symbols
        return {k: sp.lambdify((x, y, t), v, "numpy") for k, v in s.items()}

    def _call(self, key, X, Y, T):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(np.asarray(self._numeric[key](X, Y, T), dtype=float), X.shape).copy()

    def B(self, X, Y, T):
        """Magnetic field, shape ``(..., 2)``."""
        return np.stack([self._call("Bx", X, Y, T), self._call("By", X, Y, T)], axis=-1)

    def E(self, X, Y, T):
        return self._call("E", X, Y, T)

    def u(self, X, Y, T=0.0):
        return self._call("ux", X, Y, 0.0), self._call("uy", X, Y, 0.0)

    def residuals(self, X, Y, T) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Pointwise Faraday, Ohm and divergence residuals."""
        s = self.symbols
        rotE = (sp.diff(s["E"], y), -sp.diff(s["E"], x))
        faraday = [sp.diff(s["Bx"], t) + rotE[0], sp.diff(s["By"], t) + rotE[1]]
        rotB = sp.diff(s["By"], x) - sp.diff(s["Bx"], y)
        ohm = s["E"] + s["ux"] * s["By"] - s["uy"] * s["Bx"] - rotB / self.rm
        div = sp.diff(s["Bx"], x) + sp.diff(s["By"], y)
        f = sp.lambdify((x, y, t), [faraday[0], faraday[1], ohm, div], "numpy")
        fx, fy, o, d = (np.broadcast_to(np.asarray(v, dtype=float), np.shape(X)) for v in f(X, Y, T))
        return np.hypot(fx, fy), np.asarray(o), np.asarray(d)

    def self_test(self, n_points: int = 100, tol: float = 1e-10, seed: int = 0) -> float:
        """Evaluate all residuals at random points; raise if any exceeds ``tol``."""
        rng = np.random.default_rng(seed)
        X, Y = rng.uniform(-1, 1, (2, n_points))
        T = rng.uniform(0, 1, n_points)
        worst = max(float(np.abs(r).max()) for r in self.residuals(X, Y, T))
        if not worst < tol:
            raise ManufacturedSelfTestError(f"manufactured solution residual {worst:.3e} exceeds {tol:.1e}")
        return worst
