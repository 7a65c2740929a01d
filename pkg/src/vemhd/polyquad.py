"""Scaled monomial bases and quadrature on polygons and edges.

Cell integrals use a fan of triangles from an interior point of the polygon
kernel; each triangle gets a collapsed (Duffy) Gauss rule, Gauss-Legendre in
one direction and Gauss-Jacobi(1, 0) in the other, which is exact for
polynomials of the requested degree.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .mesh import CellGeometry, MeshError, kernel_point

__all__ = [
    "MAX_DEGREE",
    "QuadratureRule",
    "ScaledMonomialBasis",
    "monomial_exponents",
    "cell_rule",
    "edge_rule",
    "segment_rule",
    "triangle_rule",
    "monomial_gram",
    "fan_point",
]

MAX_DEGREE = 12


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights; ``weights.sum()`` is the measure of the domain."""

    points: np.ndarray
    weights: np.ndarray
    degree: int

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=None)
def monomial_exponents(k: int) -> tuple[tuple[int, int], ...]:
    """Exponents ``(a, b)`` with ``a + b <= k`` in graded order.

    Within a degree, powers of x come first: 1, x, y, x^2, xy, y^2, ...
    """
    return tuple((d - j, j) for d in range(k + 1) for j in range(d + 1))


class ScaledMonomialBasis:
    """Monomials ``((x - x_P)/h_P)^a ((y - y_P)/h_P)^b`` for ``a + b <= k``."""

    def __init__(self, center, diameter: float, k: int):
        self.center = np.asarray(center, dtype=float)
        self.diameter = float(diameter)
        self.k = int(k)
        self.exponents = np.array(monomial_exponents(self.k), dtype=np.int64)

    @classmethod
    def for_cell(cls, geo: CellGeometry, k: int) -> "ScaledMonomialBasis":
        return cls(geo.centroid, geo.diameter, k)

    def __len__(self) -> int:
        return len(self.exponents)

    def scaled(self, pts) -> np.ndarray:
        return (np.atleast_2d(pts) - self.center) / self.diameter

    def evaluate(self, pts) -> np.ndarray:
        """Matrix of shape ``(n_points, n_monomials)``."""
        s = self.scaled(pts)
        return s[:, :1] ** self.exponents[:, 0] * s[:, 1:2] ** self.exponents[:, 1]

    def gradient(self, pts) -> np.ndarray:
        """Array of shape ``(n_points, n_monomials, 2)``."""
        s = self.scaled(pts)
        a, b = self.exponents[:, 0], self.exponents[:, 1]
        x, y = s[:, :1], s[:, 1:2]
        with np.errstate(divide="ignore", invalid="ignore"):
            gx = np.where(a > 0, a * x ** np.maximum(a - 1, 0) * y**b, 0.0)
            gy = np.where(b > 0, b * x**a * y ** np.maximum(b - 1, 0), 0.0)
        return np.stack([gx, gy], axis=-1) / self.diameter


@lru_cache(maxsize=None)
def _reference_triangle(degree: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed rule on the triangle (0,0), (1,0), (0,1); weights sum to 1/2."""
    n = max(1, int(np.ceil((degree + 1) / 2)))
    xl, wl = roots_legendre(n)
    xj, wj = roots_jacobi(n, 1.0, 0.0)
    u = 0.5 * (xl + 1.0)
    wu = 0.5 * wl
    v = 0.5 * (xj + 1.0)
    wv = 0.25 * wj  # (1 - v) factor is absorbed by the Jacobi weight
    U, V = np.meshgrid(u, v, indexing="ij")
    W = np.outer(wu, wv)
    # map (u, v) -> (xi, eta) = (u (1 - v), v)
    xi = U * (1.0 - V)
    eta = V
    return np.column_stack([xi.ravel(), eta.ravel()]), W.ravel()


def triangle_rule(a, b, c, degree: int) -> QuadratureRule:
    """Rule on the triangle ``abc`` exact for polynomials of ``degree``."""
    a, b, c = (np.asarray(p, dtype=float) for p in (a, b, c))
    ref, w = _reference_triangle(int(degree))
    jac = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])
    pts = a + ref[:, :1] * (b - a) + ref[:, 1:] * (c - a)
    return QuadratureRule(pts, w * abs(jac), int(degree))


def fan_point(xy: np.ndarray, centroid=None) -> np.ndarray:
    """Interior anchor for fan triangulations: the centroid when it sees every vertex."""
    if centroid is None:
        from .mesh import _polygon_centroid

        centroid = _polygon_centroid(xy)
    d = np.roll(xy, -1, axis=0) - xy
    nin = np.column_stack([-d[:, 1], d[:, 0]])
    if np.all(np.einsum("ek,ek->e", centroid - xy, nin) > 0):
        return np.asarray(centroid, dtype=float)
    p = kernel_point(xy)
    if p is None:
        raise MeshError("cell has no interior kernel point for fan integration")
    return p


def cell_rule(cell, degree: int) -> QuadratureRule:
    """Quadrature on a polygon exact for polynomials up to ``degree``.

    ``cell`` is a :class:`~vemhd.mesh.CellGeometry` or an ``(n, 2)`` array of
    CCW vertices.
    """
    if degree < 0 or degree > MAX_DEGREE:
        raise ValueError(f"degree must lie in [0, {MAX_DEGREE}]")
    if isinstance(cell, CellGeometry):
        xy, centroid = cell.vertices, cell.centroid
    else:
        xy, centroid = np.asarray(cell, dtype=float), None
    anchor = fan_point(xy, centroid)
    pts, wts = [], []
    n = len(xy)
    for i in range(n):
        r = triangle_rule(anchor, xy[i], xy[(i + 1) % n], degree)
        pts.append(r.points)
        wts.append(r.weights)
    return QuadratureRule(np.vstack(pts), np.concatenate(wts), int(degree))


@lru_cache(maxsize=None)
def _gauss_legendre(npts: int):
    x, w = roots_legendre(npts)
    return 0.5 * (x + 1.0), 0.5 * w


def segment_rule(a, b, degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on the segment ``a -> b`` with arclength weights.

    Uses ``ceil((degree + 1) / 2)`` points, so degree 0 and 1 give the midpoint rule.
    """
    if degree < 0:
        raise ValueError("degree must be non-negative")
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    npts = max(1, int(np.ceil((degree + 1) / 2)))
    s, w = _gauss_legendre(npts)
    length = float(np.hypot(*(b - a)))
    return QuadratureRule(a + s[:, None] * (b - a), w * length, int(degree))


def edge_rule(mesh, edge: int, degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on a mesh edge, following its global orientation."""
    if degree > 2 * MAX_DEGREE:
        raise ValueError("edge rule degree too high")
    a, b = mesh.edges[edge]
    return segment_rule(mesh.vertices[a], mesh.vertices[b], degree)


def monomial_gram(cell: CellGeometry, k: int) -> np.ndarray:
    """``G[a, b] = \\int_P m_a m_b dA`` for the scaled monomials of degree ``<= k``."""
    basis = ScaledMonomialBasis.for_cell(cell, k)
    rule = cell_rule(cell, 2 * k)
    vals = basis.evaluate(rule.points)
    G = vals.T @ (rule.weights[:, None] * vals)
    return 0.5 * (G + G.T)
