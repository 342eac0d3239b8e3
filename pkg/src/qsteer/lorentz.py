"""Minkowski-space view of single-qubit operators and local filters.

A qubit operator E = 1/2 sum X_mu sigma_mu is positive iff X lies in the
forward light cone.  Invertible local filters S act on Theta as proper
orthochronous Lorentz transformations.
"""

from __future__ import annotations

import numpy as np

from .errors import ProductState, Singular, Superluminal
from .qstate import SIGMA, DensityMatrix, ThetaMatrix, as_density, as_theta, upsilon

METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

PRODUCT_CUTOFF = 1 - 1e-9


def is_positive(x, tol: float = 1e-12) -> bool:
    """True iff the 4-vector x = (x0, x) is in the closed forward light cone.

    Tested as x0 - |x| >= -tol, which is twice the smallest eigenvalue of
    the operator; the squared form x0^2 >= |x|^2 - tol is far looser at the apex.
    """
    x = np.asarray(x, dtype=float)
    return bool(x[0] - np.linalg.norm(x[1:]) >= -tol)


def operator_from_vector(x) -> np.ndarray:
    """1/2 sum X_mu sigma_mu."""
    return np.einsum("m,mij->ij", np.asarray(x, dtype=float), SIGMA) / 2


def gamma_factor(b) -> float:
    b = np.asarray(b, dtype=float)
    return 1.0 / np.sqrt(1.0 - b @ b)


def _boost_block(b: np.ndarray, g: float) -> np.ndarray:
    # (g - 1)/b^2 = g^2/(g + 1), which stays finite as b -> 0
    return np.eye(3) + (g * g / (g + 1.0)) * np.outer(b, b)


def boost(b) -> np.ndarray:
    """Lorentz boost L_b; maps (1, b) to a multiple of (1, 0)."""
    b = np.asarray(b, dtype=float)
    nb = np.linalg.norm(b)
    if nb >= 1 - 1e-12:
        raise Superluminal(f"|b| = {nb:.15g} >= 1")
    g = 1.0 / np.sqrt(1.0 - nb * nb)
    out = np.empty((4, 4))
    out[0, 0] = g
    out[0, 1:] = -g * b
    out[1:, 0] = -g * b
    out[1:, 1:] = _boost_block(b, g)
    return out


def canonical_state(theta) -> ThetaMatrix:
    """Filter Bob's marginal to maximally mixed: Theta' = gamma Theta L_b.

    Alice's ellipsoid is unchanged; the result has b' = 0 and a' equal to
    the ellipsoid centre.
    """
    th = as_theta(theta)
    a, b, T = th.a, th.b, th.T
    b2 = b @ b
    if np.sqrt(b2) >= PRODUCT_CUTOFF:
        raise ProductState(f"|b| = {np.sqrt(b2):.12g}: canonical state undefined")
    g = 1.0 / np.sqrt(1.0 - b2)
    a_new = g * g * (a - T @ b)
    T_new = g * (T - np.outer(a, b)) @ _boost_block(b, g)
    return ThetaMatrix.from_blocks(a_new, np.zeros(3), T_new)


def slocc_to_lorentz(S) -> np.ndarray:
    """Lorentz matrix Upsilon (S (x) S*) Upsilon^dag / |det S| of a 2x2 filter."""
    S = np.asarray(S, dtype=complex)
    det = np.linalg.det(S)
    if abs(det) < 1e-12:
        raise Singular(f"|det S| = {abs(det):.3e}")
    ups = upsilon()
    lam = ups @ np.kron(S, S.conj()) @ ups.conj().T / abs(det)
    return lam.real


def apply_slocc(rho, S_A=None, S_B=None) -> DensityMatrix:
    """(S_A (x) S_B) rho (S_A (x) S_B)^dag, renormalised."""
    m = as_density(rho).matrix
    S_A = np.eye(2) if S_A is None else np.asarray(S_A)
    S_B = np.eye(2) if S_B is None else np.asarray(S_B)
    k = np.kron(S_A, S_B)
    out = k @ m @ k.conj().T
    out = out / np.trace(out).real
    return DensityMatrix((out + out.conj().T) / 2)
