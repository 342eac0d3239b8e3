import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import bloch_vectors, seeds, states

from qsteer.ellipsoid import ellipsoid_A
from qsteer.errors import ProductState, Singular, Superluminal
from qsteer.lorentz import (
    METRIC,
    apply_slocc,
    boost,
    canonical_state,
    gamma_factor,
    is_positive,
    operator_from_vector,
    slocc_to_lorentz,
)
from qsteer.qstate import ThetaMatrix, product_state, random_density, to_theta


def inverse_sqrt_marginal(rho):
    """Oracle filter (2 rho_B)^(-1/2) by dense eigendecomposition."""
    m = rho.matrix.reshape(2, 2, 2, 2)
    rho_b = np.einsum("ijil->jl", m)
    w, v = np.linalg.eigh(2 * rho_b)
    return (v / np.sqrt(w)) @ v.conj().T


def test_is_positive_examples():
    assert is_positive([1, 0, 0, 0])
    assert is_positive([1, 1, 0, 0])
    assert not is_positive([1, 1.1, 0, 0])
    assert not is_positive([-0.1, 0, 0, 0])


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_is_positive_matches_operator_spectrum(x):
    lo = np.linalg.eigvalsh(operator_from_vector(x)).min()
    if abs(lo) > 1e-9:
        assert is_positive(x) == (lo >= -1e-12)


def test_boost_identity_and_gamma():
    assert np.array_equal(boost(np.zeros(3)), np.eye(4))
    L = boost([0, 0, 0.6])
    assert L[0, 0] == pytest.approx(1.25, abs=1e-15)
    assert gamma_factor([0, 0, 0.6]) == pytest.approx(1.25, abs=1e-15)
    assert np.abs(L.T @ METRIC @ L - METRIC).max() < 1e-12


@given(bloch_vectors(0.999))
def test_boost_preserves_metric(b):
    L = boost(b)
    assert np.abs(L.T @ METRIC @ L - METRIC).max() < 1e-10
    assert L[0, 0] >= 1
    out = L @ np.concatenate([[1.0], b])
    assert np.abs(out[1:]).max() < 1e-12


def test_boost_rejects_superluminal():
    with pytest.raises(Superluminal):
        boost([0, 0, 1.0])


def test_canonical_state_of_b_zero_is_unchanged():
    th = ThetaMatrix.from_blocks([0.1, 0, 0.2], np.zeros(3), np.diag([0.3, -0.2, 0.1]))
    assert np.abs(canonical_state(th).matrix - th.matrix).max() < 1e-15


def test_canonical_state_of_needle_example(needle_example):
    c = canonical_state(to_theta(needle_example))
    assert np.abs(c.b).max() < 1e-10
    assert abs(c.matrix[0, 0] - 1) < 1e-10


@given(states())
def test_canonical_state_matches_filter_oracle(rho):
    th = to_theta(rho)
    if np.linalg.norm(th.b) > 0.999:
        return
    filtered = to_theta(apply_slocc(rho, S_B=inverse_sqrt_marginal(rho)))
    assert np.abs(canonical_state(th).matrix - filtered.matrix).max() < 1e-9


@given(states())
def test_canonical_state_properties(rho):
    th = to_theta(rho)
    if np.linalg.norm(th.b) > 0.999:
        return
    c = canonical_state(th)
    g2 = 1 / (1 - th.b @ th.b)
    assert np.abs(c.b).max() < 1e-10
    assert np.abs(c.a - g2 * (th.a - th.T @ th.b)).max() < 1e-10
    assert np.abs(canonical_state(c).matrix - c.matrix).max() < 1e-10
    e0, e1 = ellipsoid_A(th), ellipsoid_A(c)
    assert np.abs(e0.center - e1.center).max() < 1e-9
    assert np.abs(e0.semiaxes - e1.semiaxes).max() < 1e-9


def test_canonical_state_rejects_pure_bob():
    with pytest.raises(ProductState):
        canonical_state(to_theta(product_state([0, 0, 0.5], [0, 1, 0])))


def test_slocc_identity_and_unitary():
    assert np.allclose(slocc_to_lorentz(np.eye(2)), np.eye(4), atol=1e-15)
    th = 0.7
    U = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]]) @ np.diag([1, np.exp(0.3j)])
    lam = slocc_to_lorentz(U)
    assert abs(lam[0, 0] - 1) < 1e-12
    assert np.abs(lam[0, 1:]).max() < 1e-12 and np.abs(lam[1:, 0]).max() < 1e-12
    assert abs(np.linalg.det(lam[1:, 1:]) - 1) < 1e-12


def test_slocc_rejects_singular():
    with pytest.raises(Singular):
        slocc_to_lorentz(np.array([[1, 1], [1, 1]]))


def test_slocc_filter_reproduces_boost_up_to_rotation():
    b = np.array([0, 0, 0.6])
    rho_b = (np.eye(2) + 0.6 * np.diag([1, -1])) / 2
    w, v = np.linalg.eigh(2 * rho_b)
    lam = slocc_to_lorentz((v / np.sqrt(w)) @ v.conj().T)
    # the filtered marginal is maximally mixed, exactly as after the boost
    assert np.abs((lam @ np.concatenate([[1.0], b]))[1:]).max() < 1e-12
    R = lam @ np.linalg.inv(boost(b))
    assert np.abs(R[0, 1:]).max() < 1e-12 and np.abs(R.T @ R - np.eye(4)).max() < 1e-12


@given(seeds)
def test_slocc_transformation_law(seed):
    rng = np.random.default_rng(seed)
    rho = random_density(rng.integers(1, 5), rng)
    SA, SB = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2))
    LA, LB = slocc_to_lorentz(SA), slocc_to_lorentz(SB)
    for L in (LA, LB):
        assert np.abs(L.T @ METRIC @ L - METRIC).max() < 1e-8 * np.abs(L).max() ** 2
        assert L[0, 0] >= 1 and np.linalg.det(L) > 0
    pred = LA @ to_theta(rho).matrix @ LB.T
    pred = pred / pred[0, 0]
    assert np.abs(to_theta(apply_slocc(rho, SA, SB)).matrix - pred).max() < 1e-9
