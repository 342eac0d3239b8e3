import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qsteer.errors import NotPSD
from qsteer.numerics import eig_herm4, eig_sym3, eigh4, numerical_rank, sqrt_psd, svd3, svd_small
from qsteer.qstate import bell_phi_plus, partial_transpose_B

entries = st.floats(-2, 2, allow_nan=False)


def sym(m):
    return (m + m.T) / 2


def test_eig_sym3_identity():
    vals, vecs = eig_sym3(np.eye(3))
    assert np.allclose(vals, 1, atol=1e-15)
    assert np.allclose(vecs.T @ vecs, np.eye(3), atol=1e-12)


def test_eig_sym3_diagonal_keeps_canonical_axes():
    vals, vecs = eig_sym3(np.diag([1.0, 4.0, 0.0]))
    assert np.allclose(vals, [4, 1, 0], atol=1e-15)
    assert np.allclose(np.abs(vecs), np.eye(3)[:, [1, 0, 2]], atol=1e-15)


@given(arrays(np.float64, (3, 3), elements=entries))
def test_eig_sym3_reconstructs(m):
    m = sym(m)
    vals, vecs = eig_sym3(m)
    assert np.all(np.diff(vals) <= 0)
    assert np.abs(vecs.T @ vecs - np.eye(3)).max() < 1e-12
    assert np.abs((vecs * vals) @ vecs.T - m).max() < 1e-10
    assert np.abs(m @ vecs - vecs * vals).max() < 1e-10


@given(arrays(np.float64, (3, 3), elements=entries))
def test_eig_sym3_matches_lapack(m):
    m = sym(m)
    assert np.allclose(eig_sym3(m)[0], np.linalg.eigvalsh(m)[::-1], atol=1e-12)


def test_eig_sym3_is_deterministic_on_degenerate_input():
    m = np.diag([2.0, 2.0, 1.0])
    a, b = eig_sym3(m), eig_sym3(m.copy())
    assert np.array_equal(a[1], b[1])


def test_eig_herm4_examples():
    assert np.allclose(eig_herm4(np.eye(4) / 4), 0.25, atol=1e-15)
    bell = bell_phi_plus().matrix
    assert np.allclose(eig_herm4(bell), [1, 0, 0, 0], atol=1e-14)
    assert np.allclose(eig_herm4(partial_transpose_B(bell)), [0.5, 0.5, 0.5, -0.5], atol=1e-14)


@given(st.integers(0, 2**32 - 1))
def test_eig_herm4_trace_and_charpoly(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = g + g.conj().T
    vals = eig_herm4(m)
    assert abs(vals.sum() - np.trace(m).real) < 1e-10
    for lam in vals:
        # smallest singular value of m - lam is the characteristic-polynomial residual in disguise
        assert np.linalg.svd(m - lam * np.eye(4), compute_uv=False)[-1] < 1e-9
    w, v = eigh4(m)
    assert np.abs(m @ v - v * w).max() < 1e-9


def test_sqrt_psd_examples():
    assert np.allclose(sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)
    assert np.allclose(sqrt_psd(np.diag([4.0, 1.0, 0.0])), np.diag([2.0, 1.0, 0.0]), atol=1e-15)
    with pytest.raises(NotPSD):
        sqrt_psd(np.diag([1.0, 0.0, -1e-6]))


def test_sqrt_psd_clamps_tiny_negative():
    r = sqrt_psd(np.diag([1.0, 0.0, -1e-12]))
    assert np.allclose(r, np.diag([1.0, 0.0, 0.0]), atol=1e-6)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_sqrt_psd_squares_back(seed, rank):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(3, rank))
    m = g @ g.T
    r = sqrt_psd(m)
    assert np.abs(r @ r - m).max() < 1e-9
    assert np.linalg.eigvalsh(r).min() > -1e-12


def test_sqrt_psd_2x2_hermitian():
    rho_b = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    r = sqrt_psd(rho_b)
    assert np.abs(r @ r - rho_b).max() < 1e-12


def test_svd3_family_matrix():
    u, s, v = svd3(np.diag([-9 / 20, -3 / 10, -3 / 10]))
    assert np.allclose(s, [9 / 20, 3 / 10, 3 / 10], atol=1e-15)
    assert np.allclose((u * s) @ v.T, np.diag([-9 / 20, -3 / 10, -3 / 10]), atol=1e-15)


def test_svd3_zero():
    assert np.array_equal(svd3(np.zeros((3, 3)))[1], np.zeros(3))


@given(arrays(np.float64, (3, 3), elements=entries))
def test_svd3_reconstructs(m):
    u, s, v = svd3(m)
    assert np.all(s >= 0) and np.all(np.diff(s) <= 0)
    assert np.abs((u * s) @ v.T - m).max() < 1e-10
    assert np.abs(u.T @ u - np.eye(3)).max() < 1e-10
    assert np.abs(v.T @ v - np.eye(3)).max() < 1e-10


@given(st.integers(0, 2**32 - 1), st.integers(1, 4))
def test_svd_small_rank_deficient_4x4(seed, rank):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(4, rank)) @ rng.normal(size=(rank, 4))
    u, s, v = svd_small(m)
    assert np.abs((u * s) @ v.T - m).max() < 1e-10
    assert np.abs(v.T @ v - np.eye(4)).max() < 1e-10
    assert numerical_rank(m) == rank
    assert np.allclose(s, np.linalg.svd(m, compute_uv=False), atol=1e-10)
