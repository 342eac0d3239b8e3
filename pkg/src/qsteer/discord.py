"""Zero-discord geometry, numeric discord and concurrence, and the skewed-ellipsoid family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .ellipsoid import ellipsoid_A, ellipsoid_B
from .errors import InternalInconsistency
from .numerics import eig_herm4, eigh4
from .qstate import SIGMA, DensityMatrix, ThetaMatrix, as_density, as_theta, from_theta, ket, qubit, to_theta

RADIAL_TOL = 1e-8
GRID = (64, 32)


# ---------------------------------------------------------------- skewed family


@dataclass(frozen=True)
class ThetaFamilyParams:
    """Fixed ellipsoid (centre (0, 0, 1/2), semiaxes 9/20, 3/10, 3/10) rotated about y by `angle`."""

    angle: float = 0.0
    base_T: tuple = (-9 / 20, -3 / 10, -3 / 10)
    a: tuple = (0.0, 0.0, 0.5)

    def correlation(self) -> np.ndarray:
        c, s = np.cos(self.angle), np.sin(self.angle)
        R = np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]])
        return R @ np.diag(self.base_T) @ R.T

    def theta(self) -> ThetaMatrix:
        return ThetaMatrix.from_blocks(self.a, np.zeros(3), self.correlation())


def theta_family(angle: float) -> DensityMatrix:
    """The state with a = (0, 0, 1/2), b = 0 and T = R_y(angle) diag(-9/20, -3/10, -3/10) R_y^T."""
    return from_theta(ThetaFamilyParams(angle).theta())


# ---------------------------------------------------------------- zero discord geometry


def _line_distance(e) -> float:
    """Distance from the origin to the line carrying a needle (0 for a point)."""
    if e.dimension == 0:
        return 0.0
    u = e.axes[:, 0]
    c = e.center
    return float(np.linalg.norm(c - (c @ u) * u))


def zero_discord_A(theta, tol: float = RADIAL_TOL) -> bool:
    """Alice has zero discord iff her ellipsoid is a segment of a diameter.

    A point ellipsoid (product state) counts as a degenerate segment.
    """
    e = ellipsoid_A(as_theta(theta))
    if e.dimension > 1:
        return False
    return _line_distance(e) < tol


@dataclass(frozen=True)
class ZeroDiscordB:
    value: bool
    from_A: bool
    from_B: bool
    residuals: tuple[float, float]


def zero_discord_B_check(theta, tol: float = RADIAL_TOL) -> ZeroDiscordB:
    """Two routes to Bob's zero discord.

    From E_A: the ellipsoid is a needle (half-length s) and |b| s = |c_A - a|.
    From E_B: Bob's ellipsoid is a radial segment.
    """
    th = as_theta(theta)
    eA = ellipsoid_A(th)
    if eA.dimension == 0:
        r1 = 0.0
    elif eA.dimension == 1:
        r1 = abs(np.linalg.norm(th.b) * eA.semiaxes[0] - np.linalg.norm(eA.center - th.a))
    else:
        r1 = np.inf
    eB = ellipsoid_B(th)
    r2 = _line_distance(eB) if eB.dimension <= 1 else np.inf
    v1, v2 = r1 < tol, r2 < tol
    if v1 != v2 and max(r1, r2) > 1e-5:
        raise InternalInconsistency(
            f"zero-discord routes disagree: from E_A {v1} ({r1:.3e}), from E_B {v2} ({r2:.3e})"
        )
    return ZeroDiscordB(v1, v1, v2, (float(r1), float(r2)))


def zero_discord_B_from_A_geometry(theta, tol: float = RADIAL_TOL) -> bool:
    return zero_discord_B_check(theta, tol).value


# ---------------------------------------------------------------- numeric measures


def concurrence(rho) -> float:
    """max(0, l1 - l2 - l3 - l4) with l_i the square roots of the eigenvalues of sqrt(rho) rho~ sqrt(rho)."""
    m = as_density(rho).matrix
    yy = np.kron(SIGMA[2], SIGMA[2])
    flipped = yy @ m.conj() @ yy
    vals, vecs = eigh4(m)
    root = (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T
    lam = np.sqrt(np.clip(eig_herm4(root @ flipped @ root), 0, None))
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def _h(p):
    p = np.clip(p, 0.0, 1.0)
    out = np.zeros_like(p, dtype=float)
    for q in (p, 1 - p):
        mask = q > 0
        out[mask] -= q[mask] * np.log2(q[mask])
    return out


def _h_bloch(r):
    """Von Neumann entropy (bits) of a qubit with Bloch-vector length r."""
    return _h((1 + np.asarray(r, dtype=float)) / 2)


def von_neumann_entropy(rho) -> float:
    vals = np.clip(eig_herm4(as_density(rho).matrix), 0, None)
    vals = vals[vals > 0]
    return float(-(vals * np.log2(vals)).sum())


def _conditional_entropy(th: np.ndarray, n: np.ndarray) -> np.ndarray:
    """sum_{+-} p_+- S(rho_{A|+-}) for projective measurements +-n on the second party."""
    a, b, T = th[1:, 0], th[0, 1:], th[1:, 1:]
    n = np.atleast_2d(n)
    bn = n @ b
    Tn = n @ T.T
    total = np.zeros(len(n))
    for sgn in (1.0, -1.0):
        p = (1 + sgn * bn) / 2
        safe = np.where(p > 1e-15, p, 1.0)
        y = np.linalg.norm(a + sgn * Tn, axis=1) / (2 * safe)
        total += np.where(p > 1e-15, p * _h_bloch(np.minimum(y, 1.0)), 0.0)
    return total


def _unit(angles):
    th, ph = angles
    return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def discord_numeric(rho, measured_party: str = "B", grid=GRID) -> float:
    """Discord with projective measurements on `measured_party`, in bits.

    D = S(measured marginal) - S(rho) + min_n sum_{+-} p_+- S(other | +-n),
    minimised over a polar grid of axes and then refined by Nelder-Mead.
    """
    dm = as_density(rho)
    th = to_theta(dm).matrix
    if measured_party == "A":
        th = th.T
    elif measured_party != "B":
        raise ValueError(f"measured_party must be 'A' or 'B', got {measured_party!r}")
    n_phi, n_theta = grid
    # polar angles on the upper hemisphere suffice: n and -n give the same measurement
    tt = (np.arange(n_theta) + 0.5) * (np.pi / 2) / n_theta
    pp = np.arange(n_phi) * 2 * np.pi / n_phi
    T_, P_ = np.meshgrid(tt, pp, indexing="ij")
    dirs = np.column_stack(
        [(np.sin(T_) * np.cos(P_)).ravel(), (np.sin(T_) * np.sin(P_)).ravel(), np.cos(T_).ravel()]
    )
    dirs = np.vstack([dirs, [0.0, 0.0, 1.0]])
    vals = _conditional_entropy(th, dirs)
    best = int(np.argmin(vals))
    x0 = np.array([np.arccos(np.clip(dirs[best, 2], -1, 1)), np.arctan2(dirs[best, 1], dirs[best, 0])])
    res = minimize(
        lambda x: _conditional_entropy(th, _unit(x))[0],
        x0,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
    )
    cond = min(float(vals[best]), float(res.fun))
    s_marg = float(_h_bloch(np.linalg.norm(th[0, 1:])))
    return max(0.0, s_marg - von_neumann_entropy(dm) + cond)


def scan_theta(steps: int = 32, measured_party: str = "B", grid=GRID):
    """Rows (angle, concurrence, discord, volume) on a uniform grid over [0, pi/2]."""
    if steps < 2:
        raise ValueError("steps must be at least 2")
    rows = []
    for ang in np.linspace(0, np.pi / 2, steps):
        rho = theta_family(ang)
        vol = ellipsoid_A(to_theta(rho)).volume
        rows.append((float(ang), concurrence(rho), discord_numeric(rho, measured_party, grid), vol))
    return rows


# ---------------------------------------------------------------- constructed families


def _skewed_pair(e, skew: float) -> tuple[np.ndarray, np.ndarray]:
    """Unit vector e and a unit vector at angle pi - skew from it."""
    e = np.asarray(e, dtype=float) / np.linalg.norm(e)
    perp = np.cross(e, [1.0, 0, 0])
    if np.linalg.norm(perp) < 1e-6:
        perp = np.cross(e, [0, 1.0, 0])
    perp /= np.linalg.norm(perp)
    return e, -np.cos(skew) * e + np.sin(skew) * perp


def classical_quantum(p: float, e, bloch0, bloch1, skew: float = 0.0) -> DensityMatrix:
    """p |e><e| (x) rho_0 + (1 - p) |f><f| (x) rho_1, with f antipodal to e when skew = 0.

    At skew = 0 the state has zero discord for Alice; a positive skew makes
    Alice's two states non-orthogonal.
    """
    e, f = _skewed_pair(e, skew)
    m = p * np.kron(_pure(e), qubit(bloch0)) + (1 - p) * np.kron(_pure(f), qubit(bloch1))
    return DensityMatrix(m)


def quantum_classical(p: float, bloch0, bloch1, e, skew: float = 0.0) -> DensityMatrix:
    """p rho_0 (x) |e><e| + (1 - p) rho_1 (x) |f><f|: zero discord for Bob when skew = 0."""
    e, f = _skewed_pair(e, skew)
    m = p * np.kron(qubit(bloch0), _pure(e)) + (1 - p) * np.kron(qubit(bloch1), _pure(f))
    return DensityMatrix(m)


def _pure(bloch) -> np.ndarray:
    k = ket(bloch)
    return np.outer(k, k.conj())
