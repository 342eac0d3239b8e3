"""The steering map, the complete-steering conditions and a Monte Carlo hull oracle."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ellipsoid import RANK_TOL, SteeringEllipsoid, ellipsoid_A, ellipsoid_B
from .errors import BadDecomposition, InternalInconsistency, NotPositive, ProductState, Unreachable
from .lorentz import PRODUCT_CUTOFF, boost, canonical_state, is_positive
from .numerics import svd3, svd_small
from .qstate import as_theta

ZERO_PROB = 1e-12
CONDITION_TOL = 1e-7
KERNEL_CUTOFF = 1e-8
# residuals inside this band are too close to call; disagreement there is tolerated
DEGENERACY_BAND = (1e-9, 1e-5)
MAX_POVM_ELEMENTS = 16


@dataclass(frozen=True)
class SteeringOutcome:
    p: float
    y: np.ndarray | None  # None for a zero-probability outcome

    @property
    def zero_probability(self) -> bool:
        return self.y is None


@dataclass(frozen=True)
class Povm:
    """Bob's measurement as Minkowski 4-vectors; each element is half of X_0 I + x.sigma."""

    elements: np.ndarray

    def __post_init__(self):
        el = np.atleast_2d(np.asarray(self.elements, dtype=float))
        if el.shape[1] != 4:
            raise ValueError(f"POVM elements must be 4-vectors, got shape {el.shape}")
        for i, x in enumerate(el):
            if not is_positive(x):
                raise NotPositive(f"element {i} = {x} is outside the forward light cone")
        total = el.sum(axis=0)
        if np.abs(total - [2, 0, 0, 0]).max() > 1e-10:
            raise BadDecomposition(f"elements sum to {total}, not (2, 0, 0, 0)")
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)

    def __len__(self):
        return len(self.elements)


def steer(theta, element) -> SteeringOutcome:
    """Outcome probability and Alice's conditional Bloch vector: Y = Theta X / 2."""
    x = np.asarray(element, dtype=float)
    if not is_positive(x):
        raise NotPositive(f"element {x} is outside the forward light cone")
    Y = 0.5 * as_theta(theta).matrix @ x
    if Y[0] <= ZERO_PROB:
        return SteeringOutcome(float(max(Y[0], 0.0)), None)
    return SteeringOutcome(float(Y[0]), Y[1:] / Y[0])


def steer_many(theta, elements) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised steer for rows of positive elements; returns (p, y) with y = nan where p = 0."""
    X = np.atleast_2d(np.asarray(elements, dtype=float))
    Y = 0.5 * X @ as_theta(theta).matrix.T
    p = Y[:, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        y = np.where(p[:, None] > ZERO_PROB, Y[:, 1:] / p[:, None], np.nan)
    return p, y


# ---------------------------------------------------------------- complete steering


@dataclass(frozen=True)
class SteeringReport:
    complete: bool
    cond3: bool
    cond4: bool
    cond6: bool
    residuals: tuple[float, float, float]
    degenerate: bool

    def to_json(self) -> dict:
        return {
            "complete": self.complete,
            "cond3": self.cond3,
            "cond4": self.cond4,
            "cond6": self.cond6,
            "residuals": list(self.residuals),
            "degenerate": self.degenerate,
        }


def _bloch_surface_residual(th, e: SteeringEllipsoid) -> float:
    """Distance of a from the surface of E_A shrunk about its centre by the factor |b|."""
    b = np.linalg.norm(th.b)
    z, off = e.span_coordinates(th.a)
    return float(abs(np.linalg.norm(z[0]) - b) + off[0])


def _span_residual(e: SteeringEllipsoid) -> float:
    """Distance from the origin to the affine span of an ellipsoid."""
    _, off = e.span_coordinates(np.zeros(3))
    return float(off[0])


def _kernel_residual(th, cutoff: float = KERNEL_CUTOFF) -> tuple[float, float]:
    """Norm of the projection of (1, 0, 0, 0) onto ker(Theta); also the smallest singular value."""
    _, s, V = svd_small(th.matrix)
    ker = V[:, s <= cutoff]
    return float(np.linalg.norm(ker[0])), float(s[-1])


def _in_band(x: float) -> bool:
    lo, hi = DEGENERACY_BAND
    return lo <= x <= hi


def complete_steering_check(theta, tol: float = CONDITION_TOL, rank_tol: float = RANK_TOL) -> SteeringReport:
    """Evaluate three equivalent complete-steering conditions independently.

    cond3: Alice's Bloch vector is on the surface of E_A scaled down by |b|.
    cond4: the affine span of E_B contains the maximally mixed state.
    cond6: (1, 0, 0, 0) is orthogonal to ker(Theta).
    """
    th = as_theta(theta)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF:
        raise ProductState("steering from a pure Bob marginal is trivial")
    r3 = _bloch_surface_residual(th, ellipsoid_A(th, rank_tol))
    r4 = 0.0 if np.linalg.norm(th.a) >= PRODUCT_CUTOFF else _span_residual(ellipsoid_B(th, rank_tol))
    r6, smin = _kernel_residual(th, min(tol, KERNEL_CUTOFF))
    c3, c4, c6 = r3 < tol, r4 < tol, r6 < tol
    degenerate = any(_in_band(r) for r in (r3, r4, r6)) or _in_band(smin)
    if not (c3 == c4 == c6) and not degenerate:
        raise InternalInconsistency(
            f"complete-steering conditions disagree: cond3={c3} ({r3:.3e}), "
            f"cond4={c4} ({r4:.3e}), cond6={c6} ({r6:.3e})"
        )
    return SteeringReport(c6, c3, c4, c6, (r3, r4, r6), degenerate)


def steer_to_decomposition(theta, targets, rank_tol: float = RANK_TOL) -> Povm:
    """Find a POVM for Bob steering Alice to the ensemble {(w_i, y_i)} averaging to a.

    Each element is gamma L_b 2 w_i (1, x_i) with T' x_i = y_i - a' in the
    canonical frame.  The component of x_i in ker T' is free; the ensemble
    is reachable iff those components can absorb the part of b lying in
    ker T' without leaving the light cone.
    """
    th = as_theta(theta)
    w = np.array([float(t[0]) for t in targets])
    ys = np.array([np.asarray(t[1], dtype=float) for t in targets]).reshape(-1, 3)
    if len(w) == 0 or len(w) > MAX_POVM_ELEMENTS:
        raise BadDecomposition(f"need 1..{MAX_POVM_ELEMENTS} targets, got {len(w)}")
    if np.any(w < -1e-12) or abs(w.sum() - 1) > 1e-9:
        raise BadDecomposition(f"weights must be non-negative and sum to 1 (sum {w.sum():.12g})")
    mean = w @ ys
    if np.linalg.norm(mean - th.a) > 1e-9:
        raise BadDecomposition(f"targets average to {mean}, not Alice's Bloch vector {th.a}")
    e = ellipsoid_A(th, rank_tol)
    z, off = e.span_coordinates(ys)
    radius = np.linalg.norm(z, axis=1)
    bad = np.flatnonzero((radius > 1 + 1e-8) | (off > 1e-8))
    if bad.size:
        raise BadDecomposition(f"target {int(bad[0])} lies outside Alice's steering ellipsoid")

    b = th.b
    if np.linalg.norm(b) >= PRODUCT_CUTOFF:
        raise ProductState("Bob's marginal is pure; only the trivial ensemble exists")
    canon = canonical_state(th)
    U, s, V = svd3(canon.T)
    d = int(np.sum(s > rank_tol))
    # x_i restricted to ker(T')^perp, in V-coordinates
    c = ((ys - canon.a) @ U[:, :d]) / s[:d]
    cn = np.minimum(np.linalg.norm(c, axis=1), 1.0)
    slack = np.sqrt(np.clip(1 - cn**2, 0.0, None))
    b_ker = V[:, d:].T @ b
    need = np.linalg.norm(b_ker)
    budget = w @ slack
    if need > budget + 1e-8:
        raise Unreachable(
            f"kernel condition fails: |b| has a ker(T') component {need:.6g} "
            f"but the ensemble can absorb only {budget:.6g}"
        )
    scale = min(need / budget, 1.0) if need > 0 and budget > 0 else 0.0
    unit_ker = b_ker / need if need > 0 else np.zeros(3 - d)
    x = c @ V[:, :d].T + np.outer(scale * slack, unit_ker) @ V[:, d:].T
    # rescale tiny overshoots produced by clipping
    norms = np.linalg.norm(x, axis=1)
    x = x / np.maximum(norms, 1.0)[:, None]
    g = 1.0 / np.sqrt(1.0 - b @ b)
    X = 2 * w[:, None] * np.hstack([np.ones((len(w), 1)), x])
    elements = g * X @ boost(b).T
    # absorb rounding so the sum rule holds to machine precision
    elements[:, 0] += (2.0 - elements[:, 0].sum()) * w
    elements[:, 1:] -= np.outer(w, elements[:, 1:].sum(axis=0))
    return Povm(elements)


# ---------------------------------------------------------------- Monte Carlo oracle


@dataclass(frozen=True)
class HullReport:
    max_violation: float
    min_coverage_gap: float
    max_surface_deviation: float
    n: int

    def to_json(self) -> dict:
        return {
            "max_violation": self.max_violation,
            "min_coverage_gap": self.min_coverage_gap,
            "max_surface_deviation": self.max_surface_deviation,
            "n": self.n,
        }


def fibonacci_sphere(n: int) -> np.ndarray:
    """n quasi-uniform unit vectors on a golden-angle spiral."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def uniform_sphere(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _chunk_stats(e: SteeringEllipsoid, ys: np.ndarray, dirs: np.ndarray):
    z, off = e.span_coordinates(ys)
    if e.dimension == 0:
        excess = np.linalg.norm(ys - e.center, axis=1)
        surface = excess
    else:
        r2 = np.sum(z * z, axis=1)
        excess = np.maximum(r2 - 1.0, off)
        surface = np.maximum(np.abs(r2 - 1.0), off)
    return float(excess.max()), float(surface.max()), (ys @ dirs.T).max(axis=0)


def projector_directions(b, n: int, rng: np.random.Generator, sampling: str = "canonical") -> np.ndarray:
    """n unit Bloch vectors for Bob's projectors.

    "uniform" draws them uniformly on Bob's sphere.  "canonical" draws them
    uniformly in the canonical frame and pulls them back through the boost;
    null vectors stay null, so each one is still a projector, but outcomes
    no longer crowd together when |b| is close to 1.
    """
    v = uniform_sphere(n, rng)
    if sampling == "uniform" or np.linalg.norm(b) >= PRODUCT_CUTOFF:
        return v
    if sampling != "canonical":
        raise ValueError(f"unknown sampling {sampling!r}")
    X = np.hstack([np.ones((n, 1)), v]) @ boost(b).T
    return X[:, 1:] / X[:, :1]


def mc_hull_oracle(
    theta, n: int = 10_000, seed=0, partitions: int = 1, n_directions: int = 1000, sampling: str = "canonical"
) -> HullReport:
    """Steer with n random projectors and compare the outcomes with the analytic ellipsoid.

    max_violation is the largest excess of the ellipsoid equation (or the
    off-span distance).  min_coverage_gap is the Hausdorff distance between
    the sampled hull and the ellipsoid, evaluated through their support
    functions on quasi-uniform directions.  max_surface_deviation measures
    how far samples sit from the surface.  Results do not depend on
    `partitions`.  `sampling` picks the projector distribution (see
    projector_directions).
    """
    if n < 10:
        raise ValueError("n must be at least 10")
    th = as_theta(theta)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    v = projector_directions(th.b, n, rng, sampling)
    X = np.hstack([np.ones((n, 1)), v])
    e = ellipsoid_A(th)
    dirs = fibonacci_sphere(n_directions)
    if e.dimension == 0:
        ys = np.repeat(th.a[None, :], n, axis=0)
    else:
        p, ys = steer_many(th, X)
        ys = ys[p > ZERO_PROB]
    chunks = np.array_split(ys, max(1, partitions))
    chunks = [c for c in chunks if len(c)]
    if partitions > 1:
        with ThreadPoolExecutor(max_workers=partitions) as pool:
            stats = list(pool.map(lambda c: _chunk_stats(e, c, dirs), chunks))
    else:
        stats = [_chunk_stats(e, c, dirs) for c in chunks]
    violation = max(s[0] for s in stats)
    surface = max(s[1] for s in stats)
    hull_support = np.max(np.vstack([s[2] for s in stats]), axis=0)
    gap = float(np.max(np.abs(e.support(dirs) - hull_support)))
    return HullReport(violation, gap, surface, int(len(ys)))
