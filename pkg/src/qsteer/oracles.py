"""Independent cross-checks of the closed-form results, bundled into a verification suite."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .ellipsoid import ellipsoid_A, ellipsoid_B, volume_from_ellipsoid, volume_from_rho
from .errors import InternalInconsistency, SteeringError
from .lorentz import PRODUCT_CUTOFF
from .qstate import SIGMA, as_density, det_reshuffle_identity_check, random_density, to_theta
from .reconstruct import extract_geometry, reconstruct_state
from .separability import classify_entanglement
from .steering import complete_steering_check, mc_hull_oracle


@dataclass(frozen=True)
class Tolerances:
    criterion_band: float = 1e-9
    volume_rel: float = 1e-6
    volume_ratio: float = 1e-8
    det_identity: float = 1e-9
    round_trip: float = 1e-8
    hull_violation: float = 1e-6
    hull_gap: float = 0.02

    @classmethod
    def uniform(cls, tol: float) -> "Tolerances":
        """Every threshold set to `tol` (the coverage gap keeps its own scale)."""
        return cls(tol, tol, tol, tol, tol, tol, 0.02)


# ---------------------------------------------------------------- gauge comparison


def _frame_with_last(b: np.ndarray) -> np.ndarray:
    """Orthonormal columns with the last one along b."""
    u = b / np.linalg.norm(b)
    q, _ = np.linalg.qr(np.column_stack([u, np.eye(3)]))
    q = q[:, :3]
    if q[:, 0] @ u < 0:
        q[:, 0] = -q[:, 0]
    return q[:, [1, 2, 0]]


def _procrustes(A: np.ndarray, B: np.ndarray, proper: bool) -> np.ndarray:
    """argmin over orthogonal R of |A R - B|_F, optionally restricted to det R = +1."""
    U, _, Vt = np.linalg.svd(A.T @ B)
    D = np.eye(len(U))
    if proper and np.linalg.det(U @ Vt) < 0:
        D[-1, -1] = -1
    return U @ D @ Vt


def bob_gauge(T0, T1, b, proper: bool = False) -> tuple[np.ndarray, float]:
    """Orthogonal O_B with O_B b = b best matching T0 O_B to T1; returns (O_B, max residual)."""
    T0 = np.asarray(T0, dtype=float)
    T1 = np.asarray(T1, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.linalg.norm(b) < 1e-12:
        O = _procrustes(T0, T1, proper)
    else:
        F = _frame_with_last(b)
        A, B = T0 @ F, T1 @ F
        R2 = _procrustes(A[:, :2], B[:, :2], proper)
        O = F @ np.block([[R2, np.zeros((2, 1))], [np.zeros((1, 2)), np.ones((1, 1))]]) @ F.T
    return O, float(np.abs(T0 @ O - T1).max())


def bob_unitary(O) -> np.ndarray:
    """U in SU(2) with (1 (x) U) rho (1 (x) U)^dag = rho with Theta -> Theta diag(1, O)."""
    # conjugation by U rotates Bob's Bloch vectors by R = O^T
    rotvec = Rotation.from_matrix(np.asarray(O).T).as_rotvec()
    angle = np.linalg.norm(rotvec)
    if angle < 1e-15:
        return np.eye(2, dtype=complex)
    n = rotvec / angle
    return np.cos(angle / 2) * SIGMA[0] - 1j * np.sin(angle / 2) * np.einsum("i,ijk->jk", n, SIGMA[1:])


def gauge_match(rho0, rho1) -> dict:
    """Compare two states that should agree up to Bob's residual gauge.

    Returns the orthogonal-gauge residual, whether the best gauge is a
    rotation, and (for rotations) the residual of the explicit unitary
    conjugation plus the commutator with rho_B.
    """
    d0, d1 = as_density(rho0), as_density(rho1)
    t0, t1 = to_theta(d0), to_theta(d1)
    b = t0.b
    O, res = bob_gauge(t0.T, t1.T, b)
    out = {
        "theta_residual": float(max(res, np.abs(t0.matrix[:, 0] - t1.matrix[:, 0]).max(),
                                    np.abs(t0.b - t1.b).max())),
        "proper": bool(np.linalg.det(O) > 0),
    }
    Op, res_p = bob_gauge(t0.T, t1.T, b, proper=True)
    out["proper_theta_residual"] = res_p
    U = bob_unitary(Op)
    K = np.kron(np.eye(2), U)
    out["unitary_residual"] = float(np.abs(K @ d0.matrix @ K.conj().T - d1.matrix).max())
    rho_b = (SIGMA[0] + np.einsum("i,ijk->jk", b, SIGMA[1:])) / 2
    out["commutator"] = float(np.abs(U @ rho_b - rho_b @ U).max())
    return out


# ---------------------------------------------------------------- verification suite


@dataclass
class CheckResult:
    name: str
    worst: float = 0.0
    failures: int = 0
    count: int = 0
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, value: float, ok: bool, note: str | None = None):
        self.count += 1
        if np.isfinite(value):
            self.worst = max(self.worst, float(value))
        if not ok:
            self.failures += 1
            if note and len(self.notes) < 5:
                self.notes.append(note)

    def to_json(self) -> dict:
        return {"passed": self.passed, "worst": self.worst, "failures": self.failures, "count": self.count,
                "notes": list(self.notes)}


def verify_state(rho, checks: dict, tol: Tolerances = Tolerances(), hull_samples: int = 2000, seed: int = 0,
                 label: str = "state") -> None:
    """Run every per-state oracle on rho and accumulate into `checks`."""
    dm = as_density(rho)
    th = to_theta(dm)

    def get(name):
        return checks.setdefault(name, CheckResult(name))

    # ellipsoid criterion against the partial transpose
    dec = classify_entanglement(dm, tol.criterion_band)
    ppt = dec.ppt_min_eig < -1e-10
    agree = dec.arbitrated or dec.entangled == ppt
    get("criterion_vs_ppt").record(0.0 if agree else 1.0, agree, f"{label}: criterion {dec.criterion:.3e}")

    # two volume formulas and the A/B ratio law
    a2, b2 = th.a @ th.a, th.b @ th.b
    if max(a2, b2) < PRODUCT_CUTOFF**2:
        vq = volume_from_ellipsoid(ellipsoid_A(th))
        vr = volume_from_rho(dm)
        rel = abs(vr - vq) / max(vq, 1e-12)
        get("volume_formulas").record(rel, rel < tol.volume_rel, f"{label}: rel {rel:.3e}")
        vb = volume_from_ellipsoid(ellipsoid_B(th))
        ratio = abs(vb * (1 - a2) ** 2 - vq * (1 - b2) ** 2)
        get("volume_ratio").record(ratio, ratio < tol.volume_ratio, f"{label}: {ratio:.3e}")

    r = det_reshuffle_identity_check(dm.matrix)
    get("det_reshuffle_identity").record(r, r < tol.det_identity, f"{label}: {r:.3e}")

    if b2 < PRODUCT_CUTOFF**2:
        try:
            complete_steering_check(th)
            get("steering_conditions").record(0.0, True)
        except InternalInconsistency as exc:
            get("steering_conditions").record(1.0, False, f"{label}: {exc}")

    try:
        g0 = extract_geometry(th)
        g1 = extract_geometry(to_theta(reconstruct_state(g0)))
        res = max(np.abs(g0.Q - g1.Q).max(), np.abs(g0.c - g1.c).max(),
                  np.abs(g0.a - g1.a).max(), np.abs(g0.b - g1.b).max())
        get("round_trip").record(res, res < tol.round_trip, f"{label}: {res:.3e}")
    except SteeringError as exc:
        get("round_trip").record(np.inf, False, f"{label}: {type(exc).__name__}: {exc}")

    if hull_samples:
        h = mc_hull_oracle(th, hull_samples, seed)
        get("hull_membership").record(h.max_violation, h.max_violation < tol.hull_violation,
                                      f"{label}: {h.max_violation:.3e}")


def random_matrix_identity(n: int, seed, tol: float = 1e-9) -> CheckResult:
    """det M = det M^TB - det (M^TB)^R on random complex matrices with entries in the unit disc."""
    rng = np.random.default_rng(seed)
    out = CheckResult("det_reshuffle_random")
    for i in range(n):
        r = np.sqrt(rng.random((4, 4)))
        m = r * np.exp(2j * np.pi * rng.random((4, 4)))
        res = det_reshuffle_identity_check(m)
        out.record(res, res < tol, f"matrix {i}: {res:.3e}")
    return out


def verify_suite(states=None, n_random: int = 0, seed: int = 0, rank: int = 4, tol: Tolerances = Tolerances(),
                 hull_samples: int = 2000) -> dict:
    """Run the oracle suite on the given states and/or n_random seeded random states."""
    checks: dict = {}
    rng = np.random.default_rng(seed)
    for i, rho in enumerate(states or []):
        verify_state(rho, checks, tol, hull_samples, seed + i, label=f"input {i}")
    for i in range(n_random):
        verify_state(random_density(rank, rng), checks, tol, hull_samples, seed + i, label=f"random {i}")
    checks["det_reshuffle_random"] = random_matrix_identity(100 if n_random else 10, seed, tol.det_identity)
    return checks
