"""Rebuild a two-qubit state from Alice's ellipsoid (Q, c) and the Bloch vectors a, b.

The canonical state has T~ = sqrt(Q) O for an orthogonal O, and undoing
the canonical filter gives

    a = c + T~ b,    T = c b^T + T~ (I + g^2/(g+1) b b^T) / g.

So O must send b to a vector m with sqrt(Q) m = a - c.  Any two valid O
differ by an orthogonal map fixing b, the residual freedom of Bob's
basis.  The gauge is fixed by taking the minimal rotation M with M b = m,
falling back to M composed with a reflection fixing b when M alone gives
an unphysical state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ellipsoid import ellipsoid_data, max_radius
from .errors import Incompatible, InvalidState, LengthMismatch, NotPhysical
from .lorentz import PRODUCT_CUTOFF
from .numerics import eig_sym3
from .qstate import DensityMatrix, ThetaMatrix, as_theta, from_theta, product_state

SPAN_TOL = 1e-8
RANK_TOL = 1e-7


@dataclass(frozen=True)
class GeometricData:
    Q: np.ndarray
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        Q = np.asarray(self.Q, dtype=float)
        vecs = [np.asarray(v, dtype=float) for v in (self.c, self.a, self.b)]
        if Q.shape != (3, 3) or any(v.shape != (3,) for v in vecs):
            raise InvalidState("format: Q must be 3x3 and c, a, b must have 3 entries")
        if np.abs(Q - Q.T).max() > 1e-10:
            raise InvalidState("symmetry: Q is not symmetric")
        Q = (Q + Q.T) / 2
        q, axes = eig_sym3(Q)
        if q[-1] < -1e-10:
            raise InvalidState(f"positivity: Q has eigenvalue {q[-1]:.3e}")
        c, a, b = vecs
        if max_radius(c, np.sqrt(np.clip(q, 0.0, None)), axes) > 1 + 1e-8:
            raise InvalidState("containment: ellipsoid leaves the Bloch ball")
        for name, v in (("a", a), ("b", b)):
            if np.linalg.norm(v) > 1 + 1e-9:
                raise InvalidState(f"Bloch ball: |{name}| > 1")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def to_json(self) -> dict:
        return {
            "Q": [[float(x) for x in row] for row in self.Q],
            "c": [float(x) for x in self.c],
            "a": [float(x) for x in self.a],
            "b": [float(x) for x in self.b],
        }

    @classmethod
    def from_json(cls, obj) -> "GeometricData":
        if not isinstance(obj, dict) or not {"Q", "c", "a", "b"} <= obj.keys():
            raise InvalidState('format: geometry JSON needs keys "Q", "c", "a", "b"')
        try:
            return cls(*(np.array(obj[k], dtype=float) for k in ("Q", "c", "a", "b")))
        except (TypeError, ValueError) as exc:
            raise InvalidState(f"format: geometry entries must be numeric ({exc})") from None


def extract_geometry(theta) -> GeometricData:
    th = as_theta(theta)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF:
        return GeometricData(np.zeros((3, 3)), th.a, th.a, th.b)
    c, Q = ellipsoid_data(th)
    return GeometricData(Q, c, th.a, th.b)


def _perpendicular(v: np.ndarray) -> np.ndarray:
    """Deterministic unit vector orthogonal to v: the lexicographically largest projected axis."""
    u = v / np.linalg.norm(v)
    cands = []
    for e in np.eye(3):
        w = e - (e @ u) * u
        n = np.linalg.norm(w)
        if n > 1e-6:
            cands.append(tuple(w / n))
    return np.array(max(cands))


def _axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    k = axis / np.linalg.norm(axis)
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * K + (1 - np.cos(angle)) * K @ K


def solve_rotation_M(b, target, tol: float = 1e-8) -> np.ndarray:
    """Minimal-angle rotation about b x target taking b to target."""
    b = np.asarray(b, dtype=float)
    t = np.asarray(target, dtype=float)
    nb, nt = np.linalg.norm(b), np.linalg.norm(t)
    if abs(nb - nt) > tol:
        raise LengthMismatch(f"|b| = {nb:.12g} but |target| = {nt:.12g}")
    if nb < 1e-15:
        return np.eye(3)
    u, w = b / nb, t / nt
    axis = np.cross(u, w)
    s = np.linalg.norm(axis)
    cosang = float(np.clip(u @ w, -1.0, 1.0))
    if s < 1e-12:
        if cosang > 0:
            return np.eye(3)
        return _axis_angle(_perpendicular(u), np.pi)
    return _axis_angle(axis, np.arctan2(s, cosang))


def _reflection_fixing(b: np.ndarray) -> np.ndarray:
    """Reflection through a plane containing b (identity-free det -1 gauge)."""
    n = _perpendicular(b) if np.linalg.norm(b) > 1e-15 else np.array([0.0, 0.0, 1.0])
    return np.eye(3) - 2 * np.outer(n, n)


def _sqrt_and_pinv(Q: np.ndarray, rank_tol: float):
    q, V = eig_sym3(Q)
    s = np.sqrt(np.clip(q, 0.0, None))
    keep = s > rank_tol
    root = (V * s) @ V.T
    pinv = (V[:, keep] / s[keep]) @ V[:, keep].T
    return root, pinv, V[:, keep], V[:, ~keep]


def canonical_from_geometry(Q, c, O) -> DensityMatrix:
    """The state with a = c, b = 0 and T = sqrt(Q) O."""
    root = _sqrt_and_pinv(np.asarray(Q, dtype=float), RANK_TOL)[0]
    th = ThetaMatrix.from_blocks(c, np.zeros(3), root @ np.asarray(O, dtype=float))
    return from_theta(th)


def _assemble(root, c, b, O) -> ThetaMatrix:
    Tc = root @ O
    g = 1.0 / np.sqrt(1.0 - b @ b)
    B = np.eye(3) + (g * g / (g + 1.0)) * np.outer(b, b)
    return ThetaMatrix.from_blocks(c + Tc @ b, b, np.outer(c, b) + Tc @ B / g)


def _fit_length(m, length, root, span) -> np.ndarray:
    """Rescale m to `length` by changing its components along the shortest semiaxes first.

    Noise in (sqrt Q)^+ concentrates on small semiaxes, and changes there
    move sqrt(Q) m the least.
    """
    coords = span.T @ m
    s = np.sqrt(np.clip(np.diag(span.T @ root @ root @ span), 0.0, None))
    excess = m @ m - length * length
    for i in np.argsort(s):
        if abs(excess) <= 1e-300:
            break
        new_sq = max(coords[i] ** 2 - excess, 0.0)
        excess -= coords[i] ** 2 - new_sq
        coords[i] = np.copysign(np.sqrt(new_sq), coords[i])
    return span @ coords


def target_vector(g: GeometricData, rank_tol: float = RANK_TOL) -> np.ndarray:
    """The image m = O b demanded by sqrt(Q) m = a - c and |m| = |b|."""
    root, pinv, span, ker = _sqrt_and_pinv(g.Q, rank_tol)
    d = g.a - g.c
    off = np.linalg.norm(d - span @ (span.T @ d))
    if off > SPAN_TOL:
        raise Incompatible(f"a - c leaves the span of the ellipsoid by {off:.3e}")
    m = pinv @ d
    nb, nm = np.linalg.norm(g.b), np.linalg.norm(m)
    if nm > nb or ker.shape[1] == 0:
        m = _fit_length(m, nb, root, span)
        miss = np.linalg.norm(root @ m - d)
        if abs(np.linalg.norm(m) - nb) > SPAN_TOL or miss > SPAN_TOL:
            raise Incompatible(
                f"|sqrt(Q)^+ (a - c)| = {nm:.12g} cannot be matched to |b| = {nb:.12g} (mismatch {miss:.3e})"
            )
        return m
    # a full-length target needs a kernel component; take the first kernel axis
    return m + np.sqrt(max(nb * nb - nm * nm, 0.0)) * ker[:, 0]


def reconstruct_state(g: GeometricData, rank_tol: float = RANK_TOL) -> DensityMatrix:
    """A state with Bloch vectors a, b and Alice ellipsoid (Q, c), in the fixed Bob gauge."""
    b = g.b
    if np.linalg.norm(b) >= PRODUCT_CUTOFF:
        if np.abs(g.Q).max() > 1e-10 or np.linalg.norm(g.c - g.a) > SPAN_TOL:
            raise Incompatible("a pure Bob marginal forces a point ellipsoid at a")
        return product_state(g.a, b)
    m = target_vector(g, rank_tol)
    M = solve_rotation_M(b, m)
    root = _sqrt_and_pinv(g.Q, rank_tol)[0]
    last = None
    for O in (M, M @ _reflection_fixing(b)):
        try:
            return from_theta(_assemble(root, g.c, b, O))
        except (NotPhysical, InvalidState) as exc:
            last = exc
    raise NotPhysical(f"no orientation of the ellipsoid gives a positive state ({last})")
