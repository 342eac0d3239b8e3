"""Fixed-size eigen/SVD kernels (3x3 real, 4x4 Hermitian).

All routines are cyclic Jacobi sweeps on plain Python scalars: the matrices
are tiny, so this beats LAPACK call overhead and gives deterministic,
reproducible frames.  Eigenvalues come back in descending order; each
eigenvector is sign-normalised so its first non-negligible component is
positive.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NotPSD

PSD_CLAMP = 1e-10

_MAX_SWEEPS = 60
_SIGN_EPS = 1e-12


def _sign_normalise(vec):
    """Multiply vec (a list) by a phase so the first significant entry is real positive."""
    for x in vec:
        if abs(x) > _SIGN_EPS:
            phase = x / abs(x)
            return [v / phase for v in vec]
    return vec


def _jacobi(a, n):
    """Cyclic Jacobi on a Hermitian n x n matrix given as nested lists.

    Works on real or complex entries; `a` is modified in place and the
    accumulated unitary is returned (columns are eigenvectors).
    """
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    scale = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n))
    if scale == 0.0:
        return v
    for _ in range(_MAX_SWEEPS):
        off = sum(abs(a[i][j]) ** 2 for i in range(n) for j in range(n) if i != j)
        if off <= 1e-32 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                r = abs(apq)
                if r <= 1e-300:
                    continue
                if isinstance(apq, complex) and apq.imag != 0.0:
                    u = apq / r
                    uc = u.conjugate()
                    for k in range(n):
                        a[k][q] *= uc
                        a[q][k] *= u
                        v[k][q] *= uc
                    a[p][q] = r
                    a[q][p] = r
                    apq = r
                app = a[p][p].real
                aqq = a[q][q].real
                theta = (aqq - app) / (2.0 * apq.real)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
                for k in range(n):
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
                a[p][q] = 0.0
                a[q][p] = 0.0
    return v


def _sorted_eigensystem(diag, v, n, dtype):
    cols = [_sign_normalise([v[i][j] for i in range(n)]) for j in range(n)]
    scale = max(1.0, max(abs(d) for d in diag))
    # descending eigenvalue; inside a degenerate cluster, lexicographic on the vector
    order = sorted(
        range(n),
        key=lambda j: (-round(diag[j] / (1e-12 * scale)), tuple(-float(np.real(x)) for x in cols[j])),
    )
    # values inside a cluster differ by < 1e-12 scale; sort them so the output is monotone
    vals = np.sort(np.array([diag[j] for j in order], dtype=float))[::-1].copy()
    vecs = np.array([[cols[j][i] for j in order] for i in range(n)], dtype=dtype)
    return vals, vecs


def eig_sym3(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a real symmetric 3x3 matrix.

    Only the upper triangle is read, so symmetry is exact by construction.
    Returns (eigenvalues descending, orthonormal eigenvector columns).
    """
    m = np.asarray(m, dtype=float)
    a = [[float(m[min(i, j), max(i, j)]) for j in range(3)] for i in range(3)]
    v = _jacobi(a, 3)
    return _sorted_eigensystem([a[i][i] for i in range(3)], v, 3, float)


def eigh4(m) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and unitary eigenvector columns of a 4x4 Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    a = [[complex(m[i, j]) if i <= j else complex(m[j, i]).conjugate() for j in range(4)] for i in range(4)]
    for i in range(4):
        a[i][i] = complex(a[i][i].real, 0.0)
    v = _jacobi(a, 4)
    return _sorted_eigensystem([a[i][i].real for i in range(4)], v, 4, complex)


def eig_herm4(m) -> np.ndarray:
    """The four real eigenvalues of a Hermitian 4x4 matrix, descending."""
    return eigh4(m)[0]


def _sqrt_2x2(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    tr = (m[0, 0] + m[1, 1]).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    disc = math.sqrt(max(tr * tr / 4.0 - det, 0.0))
    lo = tr / 2.0 - disc
    if lo < -PSD_CLAMP:
        raise NotPSD(f"eigenvalue {lo:.3e} < -{PSD_CLAMP:g}")
    det = max(det, 0.0)
    if lo < 0.0:
        det = 0.0
    sd = math.sqrt(det)
    norm = tr + 2.0 * sd
    if norm <= 0.0:
        return np.zeros((2, 2), dtype=complex)
    return (m + sd * np.eye(2)) / math.sqrt(norm)


def sqrt_psd(m) -> np.ndarray:
    """Principal square root of a PSD matrix (2x2 Hermitian, 3x3 symmetric or 4x4 Hermitian).

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything more negative
    raises NotPSD.
    """
    m = np.asarray(m)
    if m.shape == (2, 2):
        return _sqrt_2x2(m)
    if m.shape == (3, 3):
        vals, vecs = eig_sym3(m)
    elif m.shape == (4, 4):
        vals, vecs = eigh4(m)
    else:
        raise ValueError(f"unsupported shape {m.shape}")
    if vals[-1] < -PSD_CLAMP:
        raise NotPSD(f"eigenvalue {vals[-1]:.3e} < -{PSD_CLAMP:g}")
    root = np.sqrt(np.clip(vals, 0.0, None))
    out = (vecs * root) @ vecs.conj().T
    return out.real if m.shape == (3, 3) else out


def _complete_orthonormal(cols: list[np.ndarray], n: int) -> list[np.ndarray]:
    basis = list(cols)
    for e in np.eye(n):
        if len(basis) == n:
            break
        w = e - sum((b @ e) * b for b in basis)
        nw = np.linalg.norm(w)
        if nw > 1e-8:
            basis.append(w / nw)
    return basis


def svd_small(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One-sided (Hestenes) Jacobi SVD of a small real square matrix.

    Returns (U, s, V) with m = U diag(s) V^T, s non-negative descending.
    U and V are orthogonal (either may be a reflection).
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    a = [[float(m[i, j]) for j in range(n)] for i in range(n)]
    v = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    for _ in range(_MAX_SWEEPS):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = sum(a[k][p] * a[k][p] for k in range(n))
                beta = sum(a[k][q] * a[k][q] for k in range(n))
                gamma = sum(a[k][p] * a[k][q] for k in range(n))
                if gamma == 0.0 or abs(gamma) <= 1e-15 * math.sqrt(alpha * beta):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = (1.0 if zeta >= 0 else -1.0) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                    vkp, vkq = v[k][p], v[k][q]
                    v[k][p] = c * vkp - s * vkq
                    v[k][q] = s * vkp + c * vkq
        if not rotated:
            break
    cols = np.array(a)
    vmat = np.array(v)
    sing = np.linalg.norm(cols, axis=0)
    order = np.argsort(-sing, kind="stable")
    sing = sing[order]
    cols = cols[:, order]
    vmat = vmat[:, order]
    smax = sing[0] if n else 0.0
    ucols = []
    for j in range(n):
        if sing[j] > 1e-15 * max(smax, 1e-300) and sing[j] > 1e-300:
            ucols.append(cols[:, j] / sing[j])
        else:
            break
    k = len(ucols)
    ucols = _complete_orthonormal(ucols, n)
    u = np.array(ucols).T
    # sign convention on V columns, mirrored onto U
    for j in range(n):
        col = vmat[:, j]
        idx = np.flatnonzero(np.abs(col) > _SIGN_EPS)
        if idx.size and col[idx[0]] < 0:
            vmat[:, j] = -col
            u[:, j] = -u[:, j]
    sing[k:] = np.where(sing[k:] > 1e-300, sing[k:], 0.0)
    return u, sing, vmat


def svd3(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """SVD of a real 3x3 matrix: (U, singular values descending, V) with m = U diag(s) V^T."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise ValueError(f"expected 3x3, got {m.shape}")
    return svd_small(m)


def numerical_rank(m, tol: float = 1e-8) -> int:
    """Number of singular values above tol."""
    return int(np.sum(svd_small(m)[1] > tol))
