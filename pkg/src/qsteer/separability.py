"""Entanglement decisions and nested-simplex separable decompositions.

Two independent entanglement tests are provided: the partial-transpose
determinant of the state, and a closed-form inequality on the steering
ellipsoid (centre c, matrix Q).  Separable states are decomposed into
rank(Theta) product states by fitting a simplex around the ellipsoid whose
vertices stay inside the Bloch ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .ellipsoid import RANK_TOL, SteeringEllipsoid, ellipsoid_data
from .errors import InternalInconsistency, NotSeparable, NotTangent, SimplexNotFound
from .lorentz import PRODUCT_CUTOFF, boost, canonical_state
from .numerics import eig_herm4, numerical_rank, sqrt_psd, svd3
from .qstate import DensityMatrix, as_density, mixture, partial_transpose_B, to_theta

DET_TOL = 1e-12
EIG_TOL = 1e-10
BOUNDARY_BAND = 1e-9
THETA_RANK_TOL = 1e-8

# c^2 coefficients (of 1 - tr Q and of n^T Q n) in the ellipsoid criterion
CRITERION_COEFFS = (-2.0, -4.0)


# ---------------------------------------------------------------- entanglement tests


def ppt_data(rho) -> tuple[float, float]:
    """(det rho^{T_B}, smallest eigenvalue of rho^{T_B})."""
    pt = partial_transpose_B(as_density(rho).matrix)
    return float(np.linalg.det(pt).real), float(eig_herm4(pt)[-1])


def is_entangled_ppt(rho) -> bool:
    """det rho^{T_B} < 0, cross-checked against the smallest eigenvalue of rho^{T_B}."""
    det, lo = ppt_data(rho)
    by_det, by_eig = det < -DET_TOL, lo < -EIG_TOL
    if by_det != by_eig and abs(det) > 1e-10 and abs(lo) > 1e-8:
        raise InternalInconsistency(f"det rho^TB = {det:.3e} but min eigenvalue = {lo:.3e}")
    return by_det


def geometric_criterion(c, Q, coeffs=CRITERION_COEFFS) -> float:
    """c^4 + c^2 (k1 (1 - tr Q) + k2 n^T Q n) + h(Q), with n = c/|c|.

    h(Q) = 1 - 8 det sqrt(Q) + 2 tr(Q^2) - (tr Q)^2 - 2 tr Q.  With the
    default coefficients this equals det(4 rho^{T_B}) of the canonical state
    whenever det T' < 0, so a negative value means entanglement.
    """
    c = np.asarray(c, dtype=float)
    Q = np.asarray(Q, dtype=float)
    c2 = c @ c
    trQ = np.trace(Q)
    h = 1 - 8 * np.linalg.det(sqrt_psd(Q)) + 2 * np.trace(Q @ Q) - trQ**2 - 2 * trQ
    k1, k2 = coeffs
    # c^2 n^T Q n = c^T Q c, which also settles the c = 0 case
    return float(c2 * c2 + k1 * c2 * (1 - trQ) + k2 * (c @ Q @ c) + h)


def is_entangled_geometric(c, Q) -> bool:
    return geometric_criterion(c, Q) < 0


@dataclass(frozen=True)
class EntanglementDecision:
    entangled: bool
    criterion: float
    ppt_det: float
    ppt_min_eig: float
    arbitrated: bool  # criterion fell in the boundary band and PPT decided


def classify_entanglement(rho, band: float = BOUNDARY_BAND) -> EntanglementDecision:
    """Geometric decision, deferring to the PPT eigenvalue sign inside the boundary band."""
    dm = as_density(rho)
    th = to_theta(dm)
    det, lo = ppt_data(dm)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF:
        # Bob's marginal is pure, so the state is a product
        return EntanglementDecision(False, float("nan"), det, lo, True)
    c, Q = ellipsoid_data(th)
    value = geometric_criterion(c, Q)
    if abs(value) < band:
        return EntanglementDecision(lo < -EIG_TOL, value, det, lo, True)
    return EntanglementDecision(value < 0, value, det, lo, False)


def rotation_invariance_check(c, Q, R) -> tuple[bool, bool]:
    """(decision unchanged, value unchanged within 1e-10) under c -> Rc, Q -> R Q R^T."""
    R = np.asarray(R, dtype=float)
    c = np.asarray(c, dtype=float)
    Q = np.asarray(Q, dtype=float)
    v0 = geometric_criterion(c, Q)
    v1 = geometric_criterion(R @ c, R @ Q @ R.T)
    return (v0 < 0) == (v1 < 0), abs(v0 - v1) <= 1e-10


# ---------------------------------------------------------------- simplices


@dataclass(frozen=True)
class TangentSimplex:
    """d + 1 vertices and, for each facet (opposite vertex i), its tangency point s_i."""

    vertices: np.ndarray
    tangency: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        s = np.atleast_2d(np.asarray(self.tangency, dtype=float))
        if v.shape != s.shape or not 2 <= len(v) <= 4:
            raise ValueError(f"need 2..4 vertices and matching tangency points, got {v.shape}, {s.shape}")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "tangency", s)

    @property
    def dimension(self) -> int:
        return len(self.vertices) - 1


def vertices_from_normals(t) -> np.ndarray:
    """Vertices of the simplex bounded by the planes t_i . z = 1 (vertex j is off plane j)."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    n = len(t)
    out = np.empty_like(t)
    for j in range(n):
        rows = np.delete(t, j, axis=0)
        out[j] = np.linalg.solve(rows, np.ones(n - 1))
    return out


def unit_simplex(t) -> TangentSimplex:
    """Simplex circumscribing the unit sphere, touching it at the unit normals t."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    return TangentSimplex(vertices_from_normals(t), t)


def barycentric_weights(vertices, point=None) -> np.ndarray:
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    n, d = v.shape
    x = np.zeros(d) if point is None else np.asarray(point, dtype=float)
    A = np.vstack([v.T, np.ones(n)])
    return np.linalg.solve(A, np.append(x, 1.0))


def _facet_measures(v: np.ndarray) -> np.ndarray:
    """Length (d = 2) or area (d = 3) of the facet opposite each vertex."""
    n, d = v.shape
    out = np.empty(n)
    for i in range(n):
        f = np.delete(v, i, axis=0)
        if d == 1:
            out[i] = 1.0
        elif d == 2:
            out[i] = np.linalg.norm(f[1] - f[0])
        else:
            out[i] = 0.5 * np.linalg.norm(np.cross(f[1] - f[0], f[2] - f[0]))
    return out


def _check_unit_tangency(simplex: TangentSimplex, tol: float = 1e-8) -> None:
    v, t = simplex.vertices, simplex.tangency
    if np.any(np.abs(np.linalg.norm(t, axis=1) - 1) > tol):
        raise NotTangent("tangency points are not on the unit sphere")
    for i in range(len(v)):
        face = np.delete(v, i, axis=0)
        dev = np.abs(face @ t[i] - 1).max()
        if dev > tol:
            raise NotTangent(f"facet {i} is not tangent at its point (deviation {dev:.3e})")


def barycentric_tangency_check(simplex: TangentSimplex) -> tuple[float, float]:
    """|sum p_i t_i| for a simplex circumscribing the unit sphere, by two routes.

    Route one takes p as the barycentric coordinates of the centre; route two
    takes p_i proportional to the measure of facet i.
    """
    _check_unit_tangency(simplex)
    v, t = simplex.vertices, simplex.tangency
    p_bary = barycentric_weights(v)
    m = _facet_measures(v)
    p_facet = m / m.sum()
    return float(np.linalg.norm(p_bary @ t)), float(np.linalg.norm(p_facet @ t))


def random_tangent_simplex(d: int, rng) -> TangentSimplex:
    """Simplex circumscribing the unit d-sphere with random tangent planes."""
    rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
    while True:
        t = rng.normal(size=(d + 1, d))
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        # the planes bound a simplex around the sphere iff 0 is interior to hull(t)
        try:
            w = barycentric_weights(t)
        except np.linalg.LinAlgError:
            continue
        if np.all(w > 1e-3):
            return unit_simplex(t)


def regular_normals(d: int) -> np.ndarray:
    """Unit vectors of a regular simplex in R^d, the first along e_1."""
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        ang = 2 * np.pi * np.arange(3) / 3
        return np.column_stack([np.cos(ang), np.sin(ang)])
    k = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
    # rotate so that the first vector is e_1
    u = k[0]
    axis = np.cross(u, [1, 0, 0])
    s, c = np.linalg.norm(axis), u[0]
    axis /= s
    K = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    R = np.eye(3) + s * K + (1 - c) * K @ K
    return k @ R.T


# ---------------------------------------------------------------- decompositions


@dataclass(frozen=True)
class ProductDecomposition:
    """rho = sum_i p_i alpha_i (x) beta_i as (p, Alice Bloch, Bob Bloch) triples."""

    terms: tuple

    def __len__(self):
        return len(self.terms)

    def density(self) -> DensityMatrix:
        return mixture(self.terms)

    def residual(self, rho) -> float:
        return float(np.abs(self.density().matrix - as_density(rho).matrix).max())

    def to_json(self) -> dict:
        return {
            "terms": [
                {"p": float(p), "alice_bloch": [float(x) for x in ra], "bob_bloch": [float(x) for x in rb]}
                for p, ra, rb in self.terms
            ]
        }


@dataclass(frozen=True)
class SearchConfig:
    max_iter: int = 500
    restarts: int = 8
    seed: int = 0


@dataclass(frozen=True)
class _Frame:
    """Affine normaliser z = diag(1/s) U_d^T (y - c) of the canonical ellipsoid."""

    c: np.ndarray
    U: np.ndarray  # 3 x d
    s: np.ndarray
    V: np.ndarray  # 3 x d

    def to_bloch(self, z):
        return self.c + (np.atleast_2d(z) * self.s) @ self.U.T

    def from_bloch(self, y):
        return ((np.atleast_2d(y) - self.c) @ self.U) / self.s

    def off_span(self, y):
        w = np.atleast_2d(y) - self.c
        return np.linalg.norm(w - (w @ self.U) @ self.U.T, axis=1)


def _frame(theta, rank_tol: float) -> _Frame:
    canon = canonical_state(theta)
    U, s, V = svd3(canon.T)
    d = int(np.sum(s > rank_tol))
    return _Frame(canon.a, U[:, :d], s[:d], V[:, :d])


def tangent_simplex_for(ellipsoid: SteeringEllipsoid, vertices) -> TangentSimplex:
    """Tangency points of a full-dimensional simplex around a 3-d ellipsoid; NotTangent otherwise."""
    v = np.atleast_2d(np.asarray(vertices, dtype=float))
    if v.shape != (4, 3) or ellipsoid.dimension != 3:
        raise ValueError("tangent_simplex_for needs a tetrahedron and an obese ellipsoid")
    Q, c = ellipsoid.matrix, ellipsoid.center
    centroid = v.mean(axis=0)
    pts = []
    for i in range(4):
        f = np.delete(v, i, axis=0)
        n = np.cross(f[1] - f[0], f[2] - f[0])
        n /= np.linalg.norm(n)
        if n @ (f[0] - centroid) < 0:
            n = -n
        q = np.sqrt(n @ Q @ n)
        gap = n @ f[0] - (n @ c + q)
        if abs(gap) > 1e-8:
            raise NotTangent(f"facet {i} misses the ellipsoid by {gap:.3e}")
        pts.append(c + Q @ n / q)
    return TangentSimplex(v, np.array(pts))


def _unit_normals_from(simplex: TangentSimplex, fr: _Frame, tol: float = 1e-8) -> np.ndarray:
    """Convert a Bloch-space tangent simplex to unit normals in the normalised frame."""
    d = len(fr.s)
    if simplex.dimension != d:
        raise NotTangent(f"simplex dimension {simplex.dimension} != ellipsoid dimension {d}")
    if np.any(fr.off_span(simplex.vertices) > tol) or np.any(fr.off_span(simplex.tangency) > tol):
        raise NotTangent("simplex does not lie in the affine span of the ellipsoid")
    t = fr.from_bloch(simplex.tangency)
    v = fr.from_bloch(simplex.vertices)
    _check_unit_tangency(TangentSimplex(v, t), tol)
    return t


def _vertex_radius2(t_flat, d, fr: _Frame):
    t = t_flat.reshape(d + 1, d)
    t = t / np.linalg.norm(t, axis=1, keepdims=True)
    r = fr.to_bloch(vertices_from_normals(t))
    return np.sum(r * r, axis=1)


def _random_rotation(d: int, rng) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(d, d)))
    q = q * np.sign(np.diag(r))
    return q


def _search_normals(fr: _Frame, cfg: SearchConfig) -> np.ndarray | None:
    """Epigraph SLSQP for unit normals keeping every vertex within the Bloch ball."""
    d = len(fr.s)
    if d == 1:
        return np.array([[-1.0], [1.0]])
    rng = np.random.default_rng(cfg.seed)
    reg = regular_normals(d)
    starts = []
    cn = np.linalg.norm(fr.c)
    if cn > 1e-12:
        # first facet tangent at the ellipsoid point farthest along c
        t0 = fr.s * (fr.U.T @ (fr.c / cn))
        if np.linalg.norm(t0) > 1e-12:
            t0 /= np.linalg.norm(t0)
            R = _reflection_to(reg[0], t0)
            starts.append(reg @ R.T)
    while len(starts) < cfg.restarts:
        starts.append(reg @ _random_rotation(d, rng).T)

    def safe_r2(x):
        try:
            return _vertex_radius2(x, d, fr)
        except np.linalg.LinAlgError:
            return np.full(d + 1, 1e6)

    def centre_weights(x):
        # the simplex encloses the ellipsoid only if 0 is inside hull(t)
        t = x.reshape(d + 1, d)
        try:
            return barycentric_weights(t / np.linalg.norm(t, axis=1, keepdims=True))
        except np.linalg.LinAlgError:
            return np.full(d + 1, -1.0)

    def acceptable(x):
        return centre_weights(x).min() > 1e-9 and safe_r2(x).max() <= 1.0

    for t_init in starts:
        if acceptable(t_init.ravel()):
            return t_init
        x0 = np.append(t_init.ravel(), safe_r2(t_init.ravel()).max())
        res = minimize(
            lambda x: x[-1],
            x0,
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": lambda x: x[-1] - safe_r2(x[:-1])},
                {"type": "ineq", "fun": lambda x: centre_weights(x[:-1]) - 1e-6},
            ],
            options={"maxiter": cfg.max_iter, "ftol": 1e-12},
        )
        t = res.x[:-1].reshape(d + 1, d)
        t /= np.linalg.norm(t, axis=1, keepdims=True)
        if acceptable(t.ravel()):
            return t
    return None


def _reflection_to(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Householder reflection sending unit u to unit w."""
    d = len(u)
    if np.allclose(u, w):
        return np.eye(d)
    h = u - w
    return np.eye(d) - 2 * np.outer(h, h) / (h @ h)


def _assemble(th, fr: _Frame, t: np.ndarray) -> ProductDecomposition:
    v = vertices_from_normals(t)
    p = barycentric_weights(v)
    r = fr.to_bloch(v)
    norms = np.linalg.norm(r, axis=1)
    r = r / np.maximum(norms, 1.0)[:, None]
    beta = -t @ fr.V.T
    beta /= np.linalg.norm(beta, axis=1, keepdims=True)
    b = th.b
    # undo the canonical filter on Bob: (1, beta) -> L_{-b} (1, beta)
    X = np.hstack([np.ones((len(beta), 1)), beta]) @ boost(-b).T
    g = 1.0 / np.sqrt(1 - b @ b)
    weights = p * X[:, 0] / g
    bob = X[:, 1:] / X[:, :1]
    return ProductDecomposition(tuple((float(w), ri, bi) for w, ri, bi in zip(weights, r, bob)))


def decompose_separable(
    rho, simplex: TangentSimplex | None = None, config: SearchConfig = SearchConfig(), rank_tol: float = RANK_TOL
) -> ProductDecomposition:
    """Write a separable state as a mixture of rank(Theta) product states.

    With `simplex` given (in Bloch coordinates, tangent to Alice's ellipsoid)
    it is used as is; otherwise a circumscribing simplex with vertices in the
    Bloch ball is searched for, raising SimplexNotFound when the budget runs
    out.
    """
    dm = as_density(rho)
    if is_entangled_ppt(dm):
        raise NotSeparable("state has a negative partial transpose")
    th = to_theta(dm)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF or numerical_rank(th.matrix, THETA_RANK_TOL) == 1:
        return ProductDecomposition(((1.0, th.a, th.b),))
    fr = _frame(th, rank_tol)
    if simplex is not None:
        t = _unit_normals_from(simplex, fr)
    else:
        t = _search_normals(fr, config)
        if t is None:
            raise SimplexNotFound(
                f"no circumscribing simplex found within {config.restarts} restarts "
                f"of {config.max_iter} iterations"
            )
    return _assemble(th, fr, t)


def minimal_product_count(rho) -> int:
    """rank(Theta), the fewest product states in any decomposition of a separable state."""
    dm = as_density(rho)
    if is_entangled_ppt(dm):
        raise NotSeparable("state has a negative partial transpose")
    return numerical_rank(to_theta(dm).matrix, THETA_RANK_TOL)
