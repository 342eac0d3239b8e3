"""Alice's and Bob's steering ellipsoids, their volume and obesity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lorentz import PRODUCT_CUTOFF
from .numerics import eig_sym3
from .qstate import ThetaMatrix, as_density, as_theta, partial_transpose_B

RANK_TOL = 1e-7

SHAPES = ("point", "needle", "pancake", "obese")


@dataclass(frozen=True)
class SteeringEllipsoid:
    center: np.ndarray
    semiaxes: np.ndarray  # descending
    axes: np.ndarray  # columns are the axis directions
    dimension: int

    @property
    def matrix(self) -> np.ndarray:
        """Q = axes diag(s^2) axes^T."""
        return (self.axes * self.semiaxes**2) @ self.axes.T

    @property
    def shape(self) -> str:
        return SHAPES[self.dimension]

    @property
    def volume(self) -> float:
        return volume_from_ellipsoid(self)

    def span_coordinates(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Normalised coordinates of points on the ellipsoid's span, plus off-span distance.

        A point lies on the ellipsoid iff its coordinates have unit norm and
        the off-span distance vanishes.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self.center
        w = pts @ self.axes
        d = self.dimension
        coords = w[:, :d] / self.semiaxes[:d]
        off = np.linalg.norm(w[:, d:], axis=1)
        return coords, off

    def support(self, directions) -> np.ndarray:
        """Support function h(u) = u.c + sqrt(u^T Q u) for each row u."""
        u = np.atleast_2d(np.asarray(directions, dtype=float))
        proj = (u @ self.axes) * self.semiaxes
        return u @ self.center + np.linalg.norm(proj, axis=1)

    def surface_point(self, u) -> np.ndarray:
        """c + axes diag(s) u for a unit u in the first `dimension` coordinates."""
        u = np.asarray(u, dtype=float)
        full = np.zeros(3)
        full[: len(u)] = u
        return self.center + self.axes @ (self.semiaxes * full)

    def to_json(self) -> dict:
        return {
            "center": [float(x) for x in self.center],
            "semiaxes": [float(x) for x in self.semiaxes],
            # column-major: list of axis directions
            "axes": [[float(x) for x in col] for col in self.axes.T],
            "dimension": int(self.dimension),
        }


def ellipsoid_data(theta) -> tuple[np.ndarray, np.ndarray]:
    """Centre c_A and matrix Q_A; the caller must ensure |b| < 1."""
    th = as_theta(theta)
    a, b, T = th.a, th.b, th.T
    b2 = b @ b
    k = 1.0 / (1.0 - b2)
    M = T - np.outer(a, b)
    Q = k * M @ (np.eye(3) + k * np.outer(b, b)) @ M.T
    c = k * (a - T @ b)
    return c, (Q + Q.T) / 2


def ellipsoid_A(theta, rank_tol: float = RANK_TOL) -> SteeringEllipsoid:
    th = as_theta(theta)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF:
        return SteeringEllipsoid(th.a, np.zeros(3), np.eye(3), 0)
    c, Q = ellipsoid_data(th)
    q, axes = eig_sym3(Q)
    s = np.sqrt(np.clip(q, 0.0, None))
    return SteeringEllipsoid(c, s, axes, int(np.sum(s > rank_tol)))


def ellipsoid_B(theta, rank_tol: float = RANK_TOL) -> SteeringEllipsoid:
    return ellipsoid_A(as_theta(theta).swap(), rank_tol)


def volume_from_ellipsoid(e: SteeringEllipsoid) -> float:
    return float(4 * np.pi / 3 * np.prod(e.semiaxes))


def volume_from_rho(rho) -> float:
    """64 pi/3 |det rho - det rho^{T_B}| / (1 - b^2)^2; zero for product states."""
    dm = as_density(rho)
    b = as_theta(dm).b
    b2 = b @ b
    if np.sqrt(b2) >= PRODUCT_CUTOFF:
        return 0.0
    m = dm.matrix
    diff = np.linalg.det(m) - np.linalg.det(partial_transpose_B(m))
    return float(64 * np.pi / 3 * abs(diff) / (1 - b2) ** 2)


def volume_ratio_check(theta) -> float:
    """|V_B - (1-b^2)^2/(1-a^2)^2 V_A|."""
    th = as_theta(theta)
    a2, b2 = th.a @ th.a, th.b @ th.b
    va = volume_from_ellipsoid(ellipsoid_A(th))
    vb = volume_from_ellipsoid(ellipsoid_B(th))
    return float(abs(vb - (1 - b2) ** 2 / (1 - a2) ** 2 * va))


def max_radius(center, semiaxes, axes) -> float:
    """max |c + sum s_i z_i u_i| over |z| <= 1: the farthest ellipsoid point from the origin.

    Stationarity gives z_i = g_i/(lam - s_i^2) with g_i = s_i (c.u_i) and
    lam fixed by |z| = 1; lam is found by bisection on the secular equation.
    """
    c = np.asarray(center, dtype=float)
    s = np.asarray(semiaxes, dtype=float)
    A = s * s
    g = s * (np.asarray(axes, dtype=float).T @ c)
    top = A.max()
    if top <= 0.0:
        return float(np.linalg.norm(c))

    def value(z):
        return float(np.linalg.norm(c + np.asarray(axes) @ (s * z)))

    gap = top - A
    near = gap <= 1e-14 * max(top, 1.0)
    if np.all(np.abs(g[near]) <= 1e-12 * (np.linalg.norm(g) + top)):
        # hard case: lam = top if the remaining components fit inside the ball
        z = np.zeros(3)
        z[~near] = g[~near] / gap[~near]
        rest = 1.0 - z @ z
        if rest >= 0:
            idx = np.flatnonzero(near)[0]
            z[idx] = np.sqrt(rest)
            return value(z)
    lo, hi = top, top + np.linalg.norm(g) + 1.0
    for _ in range(200):
        if hi - lo <= 1e-15 * hi:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or np.sum((g / (mid - A)) ** 2) > 1.0:
            lo = mid
        else:
            hi = mid
    return value(g / (hi - A))


def contained_in_ball(e: SteeringEllipsoid, tol: float = 1e-8) -> bool:
    return max_radius(e.center, e.semiaxes, e.axes) <= 1 + tol


def is_obese(e: SteeringEllipsoid, rank_tol: float = RANK_TOL) -> bool:
    return bool(e.semiaxes[2] > rank_tol)


def ellipsoid_to_theta_bob_frame(e: SteeringEllipsoid, theta: ThetaMatrix) -> dict:
    """Geometry export augmented with Bob's Bloch vector (fixes the orientation gauge)."""
    out = e.to_json()
    out["bob_bloch"] = [float(x) for x in theta.b]
    return out
