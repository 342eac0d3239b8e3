"""Two-qubit state representations: density matrix, Pauli Theta matrix, reshuffled form.

Basis order is |00>, |01>, |10>, |11> with Alice the first factor and Bob
the second.  Every index map below (partial transpose, reshuffle) assumes
this ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidState, NotPhysical
from .numerics import eig_herm4

SIGMA = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# PAULI_PAIRS[mu, nu] = sigma_mu (x) sigma_nu
PAULI_PAIRS = np.einsum("aij,bkl->abikjl", SIGMA, SIGMA).reshape(4, 4, 4, 4)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
THETA_PSD_TOL = 1e-8


@dataclass(frozen=True)
class DensityMatrix:
    """Validated two-qubit density matrix.

    `psd_tol` lets callers holding low-precision data (e.g. from_theta)
    accept slightly negative eigenvalues.
    """

    matrix: np.ndarray
    psd_tol: float = field(default=PSD_TOL, repr=False, compare=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (4, 4):
            raise InvalidState(f"shape: expected 4x4, got {m.shape}")
        herm = np.abs(m - m.conj().T).max()
        if herm > HERMITIAN_TOL:
            raise InvalidState(f"hermiticity: |rho - rho^dag| = {herm:.3e} > {HERMITIAN_TOL:g}")
        m = (m + m.conj().T) / 2
        tr = np.trace(m).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvalidState(f"unit trace: tr(rho) = {tr:.12g}")
        lo = eig_herm4(m)[-1]
        if lo < -self.psd_tol:
            raise InvalidState(f"positivity: min eigenvalue {lo:.3e} < -{self.psd_tol:g}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True)
class ThetaMatrix:
    """Real 4x4 Pauli-basis matrix with blocks (1, b^T; a, T)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise InvalidState(f"shape: expected 4x4 Theta, got {m.shape}")
        if not np.all(np.isfinite(m)):
            raise InvalidState("finiteness: Theta has non-finite entries")
        if abs(m[0, 0] - 1.0) > 1e-10:
            raise InvalidState(f"normalisation: Theta_00 = {m[0, 0]:.12g} != 1")
        for name, vec in (("a", m[1:, 0]), ("b", m[0, 1:])):
            if np.linalg.norm(vec) > 1 + 1e-9:
                raise InvalidState(f"Bloch ball: |{name}| = {np.linalg.norm(vec):.12g} > 1")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_blocks(cls, a, b, T) -> "ThetaMatrix":
        m = np.eye(4)
        m[1:, 0] = a
        m[0, 1:] = b
        m[1:, 1:] = T
        return cls(m)

    @property
    def a(self) -> np.ndarray:
        return self.matrix[1:, 0].copy()

    @property
    def b(self) -> np.ndarray:
        return self.matrix[0, 1:].copy()

    @property
    def T(self) -> np.ndarray:
        return self.matrix[1:, 1:].copy()

    def swap(self) -> "ThetaMatrix":
        """Exchange the roles of Alice and Bob (Theta -> Theta^T)."""
        return ThetaMatrix(self.matrix.T)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def as_density(rho) -> DensityMatrix:
    return rho if isinstance(rho, DensityMatrix) else DensityMatrix(np.asarray(rho))


def as_theta(theta) -> ThetaMatrix:
    """Coerce a ThetaMatrix, DensityMatrix or 4x4 real array into a ThetaMatrix."""
    if isinstance(theta, ThetaMatrix):
        return theta
    if isinstance(theta, DensityMatrix):
        return to_theta(theta)
    return ThetaMatrix(np.asarray(theta, dtype=float))


def to_theta(rho) -> ThetaMatrix:
    """Theta_{mu nu} = tr(rho sigma_mu (x) sigma_nu)."""
    m = as_density(rho).matrix
    theta = np.einsum("ij,mnji->mn", m, PAULI_PAIRS).real
    theta[0, 0] = 1.0
    return ThetaMatrix(theta)


def theta_to_matrix(theta) -> np.ndarray:
    """rho = 1/4 sum Theta_{mu nu} sigma_mu (x) sigma_nu, without positivity checks."""
    th = np.asarray(theta.matrix if isinstance(theta, ThetaMatrix) else theta, dtype=float)
    return np.einsum("mn,mnij->ij", th, PAULI_PAIRS) / 4


def from_theta(theta, psd_tol: float = THETA_PSD_TOL) -> DensityMatrix:
    th = as_theta(theta)
    m = theta_to_matrix(th)
    lo = eig_herm4(m)[-1]
    if lo < -psd_tol:
        raise NotPhysical(f"positivity: Theta gives min eigenvalue {lo:.3e}")
    return DensityMatrix(m, psd_tol=psd_tol)


def partial_transpose_B(rho) -> np.ndarray:
    """Transpose Bob's indices: <ij|M|kl> -> <il|M|kj>."""
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def reshuffle(m) -> np.ndarray:
    """Realignment (ij;kl) -> (ik;jl)."""
    m = np.asarray(m.matrix if isinstance(m, DensityMatrix) else m)
    return m.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)


def upsilon() -> np.ndarray:
    """The unitary mapping vec'd 2x2 operators to Pauli coordinates."""
    return np.array(
        [[1, 0, 0, 1], [0, 1, 1, 0], [0, 1j, -1j, 0], [1, 0, 0, -1]], dtype=complex
    ) / np.sqrt(2)


def theta_via_reshuffle(rho) -> np.ndarray:
    """Theta computed as 2 Upsilon rho^R Upsilon^T (independent of to_theta)."""
    ups = upsilon()
    return (2 * ups @ reshuffle(rho) @ ups.T).real


def det_reshuffle_identity_check(m) -> float:
    """|det M - det M^{T_B} + det((M^{T_B})^R)|; vanishes for every 4x4 M."""
    m = np.asarray(m, dtype=complex)
    pt = partial_transpose_B(m)
    return float(abs(np.linalg.det(m) - np.linalg.det(pt) + np.linalg.det(reshuffle(pt))))


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_density(rank: int = 4, seed=None) -> DensityMatrix:
    """Induced-measure random state: partial trace of a random pure state on C^4 (x) C^rank."""
    if rank not in (1, 2, 3, 4):
        raise ValueError(f"rank must be 1..4, got {rank}")
    rng = _rng(seed)
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix((m + m.conj().T) / 2)


# ---------------------------------------------------------------- constructors


def qubit(bloch) -> np.ndarray:
    """2x2 density operator with the given Bloch vector."""
    r = np.asarray(bloch, dtype=float)
    return (SIGMA[0] + np.einsum("i,ijk->jk", r, SIGMA[1:])) / 2


def ket(bloch) -> np.ndarray:
    """Pure qubit ket with unit Bloch vector `bloch`."""
    x, y, z = np.asarray(bloch, dtype=float) / np.linalg.norm(bloch)
    theta = np.arccos(np.clip(z, -1, 1))
    phi = np.arctan2(y, x)
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def product_state(a, b) -> DensityMatrix:
    return DensityMatrix(np.kron(qubit(a), qubit(b)))


def pure_state(psi) -> DensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return DensityMatrix(np.outer(psi, psi.conj()))


def bell_phi_plus() -> DensityMatrix:
    return pure_state([1, 0, 0, 1])


def werner(p: float) -> DensityMatrix:
    """p |Psi-><Psi-| + (1-p) I/4, i.e. a = b = 0, T = -p I."""
    singlet = pure_state([0, 1, -1, 0]).matrix
    return DensityMatrix(p * singlet + (1 - p) * np.eye(4) / 4)


def mixture(terms) -> DensityMatrix:
    """sum_i p_i alpha_i (x) beta_i from (p, alice_bloch, bob_bloch) triples."""
    m = sum(p * np.kron(qubit(ra), qubit(rb)) for p, ra, rb in terms)
    return DensityMatrix(m)


# ---------------------------------------------------------------- JSON


def parse_state(obj) -> DensityMatrix:
    """Parse {"rho": 4x4 [re, im] pairs} or {"a", "b", "T"} into a validated state."""
    if not isinstance(obj, dict):
        raise InvalidState("format: state JSON must be an object")
    if "rho" in obj:
        try:
            arr = np.array(obj["rho"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidState(f"format: rho entries must be [re, im] pairs ({exc})") from None
        if arr.shape != (4, 4, 2):
            raise InvalidState(f"format: rho must be 4x4 [re, im] pairs, got shape {arr.shape}")
        return DensityMatrix(arr[..., 0] + 1j * arr[..., 1])
    if {"a", "b", "T"} <= obj.keys():
        try:
            a = np.array(obj["a"], dtype=float)
            b = np.array(obj["b"], dtype=float)
            T = np.array(obj["T"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidState(f"format: a, b, T must be numeric ({exc})") from None
        if a.shape != (3,) or b.shape != (3,) or T.shape != (3, 3):
            raise InvalidState("format: a and b must have 3 entries, T must be 3x3")
        try:
            return from_theta(ThetaMatrix.from_blocks(a, b, T))
        except NotPhysical as exc:
            raise InvalidState(str(exc)) from None
    raise InvalidState('format: expected key "rho" or keys "a", "b", "T"')


def state_to_json(rho) -> dict:
    m = as_density(rho).matrix
    return {"rho": [[[float(z.real), float(z.imag)] for z in row] for row in m]}
