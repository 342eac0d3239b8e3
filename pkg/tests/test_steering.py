import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from strategies import seeds, states

from qsteer.discord import theta_family
from qsteer.ellipsoid import ellipsoid_A
from qsteer.errors import BadDecomposition, NotPositive, ProductState, Unreachable
from qsteer.qstate import SIGMA, ThetaMatrix, bell_phi_plus, mixture, product_state, random_density, to_theta, werner
from qsteer.steering import (
    Povm,
    complete_steering_check,
    mc_hull_oracle,
    projector_directions,
    steer,
    steer_many,
    steer_to_decomposition,
    uniform_sphere,
)


def steer_by_partial_trace(rho, x):
    """Oracle: tr_B(rho (1 (x) E)) with E = 1/2 X.sigma, returned as (p, Bloch vector)."""
    E = np.einsum("m,mij->ij", np.asarray(x, dtype=float), SIGMA) / 2
    m = (rho.matrix @ np.kron(np.eye(2), E)).reshape(2, 2, 2, 2)
    alice = np.einsum("ijkj->ik", m)
    p = np.trace(alice).real
    return p, np.array([np.trace(alice @ s).real for s in SIGMA[1:]]) / p


def random_mixture(k, rng):
    terms = []
    for w in rng.dirichlet(np.ones(k)):
        ra, rb = rng.normal(size=(2, 3))
        terms.append((w, ra / np.linalg.norm(ra) * rng.uniform(0.2, 1), rb / np.linalg.norm(rb) * rng.uniform(0.2, 1)))
    return mixture(terms)


def test_identity_element_gives_marginal():
    th = to_theta(random_density(4, 0))
    out = steer(th, [1, 0, 0, 0])
    assert out.p == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(out.y, th.a, atol=1e-15)


def test_b_zero_projector_gives_a_plus_Tv():
    th = to_theta(theta_family(0.4))
    v = np.array([0.6, 0, 0.8])
    out = steer(th, np.concatenate([[1.0], v]))
    assert out.p == pytest.approx(0.5, abs=1e-15)
    assert np.allclose(out.y, th.a + th.T @ v, atol=1e-15)


def test_phi_plus_steers_to_zero():
    out = steer(to_theta(bell_phi_plus()), [1, 0, 0, 1])
    assert np.allclose(out.y, [0, 0, 1], atol=1e-15)


def test_zero_probability_and_non_positive():
    th = to_theta(product_state([0, 0, 0.3], [0, 0, 1]))
    out = steer(th, [1, 0, 0, -1])
    assert out.zero_probability and out.y is None
    with pytest.raises(NotPositive):
        steer(th, [1, 1.2, 0, 0])


@given(states(), seeds)
def test_steer_matches_partial_trace(rho, seed):
    rng = np.random.default_rng(seed)
    v = uniform_sphere(1, rng)[0] * rng.uniform(0, 1)
    x = np.concatenate([[1.0], v])
    out = steer(to_theta(rho), x)
    if out.zero_probability:
        return
    p, y = steer_by_partial_trace(rho, x)
    assert abs(out.p - p) < 1e-12
    assert np.abs(out.y - y).max() < 1e-9
    assert -1e-12 <= out.p <= 1 + 1e-12 and np.linalg.norm(out.y) <= 1 + 1e-9


@given(states(), seeds)
def test_convexity(rho, seed):
    rng = np.random.default_rng(seed)
    th = to_theta(rho)
    x1, x2 = (np.concatenate([[1.0], uniform_sphere(1, rng)[0]]) for _ in range(2))
    t = rng.random()
    Y = lambda x: 0.5 * th.matrix @ x
    mixed = Y(t * x1 + (1 - t) * x2)
    assert np.abs(mixed - (t * Y(x1) + (1 - t) * Y(x2))).max() < 1e-12
    p, _ = steer_many(th, [t * x1 + (1 - t) * x2])
    assert abs(p[0] - mixed[0]) < 1e-15


def test_povm_validation():
    Povm([[1, 0, 0, 1], [1, 0, 0, -1]])
    with pytest.raises(BadDecomposition):
        Povm([[1, 0, 0, 1], [0.9, 0, 0, -0.9]])
    with pytest.raises(NotPositive):
        Povm([[1, 0, 0, 1.5], [1, 0, 0, -1.5]])


def test_b_zero_is_complete():
    rng = np.random.default_rng(1)
    for _ in range(20):
        T = rng.normal(size=(3, 3)) * 0.2
        rep = complete_steering_check(ThetaMatrix.from_blocks(np.zeros(3), np.zeros(3), T))
        assert rep.complete and rep.cond3 and rep.cond4 and rep.cond6


def test_obese_states_are_complete():
    assert complete_steering_check(to_theta(werner(0.5))).complete
    rng = np.random.default_rng(2)
    for _ in range(200):
        th = to_theta(random_density(4, rng))
        assert ellipsoid_A(th).dimension == 3
        assert complete_steering_check(th).complete


def test_needle_example_is_incomplete(needle_example):
    rep = complete_steering_check(to_theta(needle_example))
    assert not rep.complete and not rep.cond3 and not rep.cond4 and not rep.cond6
    assert not rep.degenerate


def test_pure_bob_marginal_rejected():
    with pytest.raises(ProductState):
        complete_steering_check(to_theta(product_state([0, 0, 0.3], [1, 0, 0])))


@pytest.mark.parametrize("k", [2, 3])
def test_conditions_agree_on_degenerate_mixtures(k):
    rng = np.random.default_rng(k)
    seen = set()
    for _ in range(300):
        rep = complete_steering_check(to_theta(random_mixture(k, rng)))
        assert rep.cond3 == rep.cond4 == rep.cond6 or rep.degenerate
        seen.add(rep.complete)
    assert seen == {False}


def test_complete_degenerate_states_exist():
    # b = 0 needles and pancakes are complete
    needle = mixture([(0.5, [0, 0, 0.8], [0, 0, 1]), (0.5, [0, 0, -0.8], [0, 0, -1])])
    pancake = mixture([(1 / 3, [np.cos(t), np.sin(t), 0], [np.cos(t), np.sin(t), 0]) for t in (0, 2.1, 4.2)])
    for rho in (needle, pancake):
        th = to_theta(rho)
        assert ellipsoid_A(th).dimension < 3
        assert complete_steering_check(th).complete


@given(states())
def test_conditions_agree(rho):
    th = to_theta(rho)
    if np.linalg.norm(th.b) < 0.999:
        rep = complete_steering_check(th)
        assert rep.cond3 == rep.cond4 == rep.cond6 or rep.degenerate


def test_decomposition_needle_antipodes():
    th = ThetaMatrix.from_blocks([0, 0, 0.1], np.zeros(3), np.diag([0, 0, 0.6]))
    targets = [(0.5, [0, 0, 0.7]), (0.5, [0, 0, -0.5])]
    povm = steer_to_decomposition(th, targets)
    assert len(povm) == 2
    assert np.abs(povm.elements.sum(axis=0) - [2, 0, 0, 0]).max() < 1e-10
    for (w, y), x in zip(targets, povm.elements):
        out = steer(th, x)
        assert abs(out.p - w) < 1e-9 and np.abs(out.y - y).max() < 1e-9


def test_decomposition_trivial():
    th = to_theta(random_density(3, 4))
    povm = steer_to_decomposition(th, [(1.0, th.a)])
    assert np.allclose(povm.elements, [[2, 0, 0, 0]], atol=1e-12)


def brute_force_margin(th, targets):
    """Oracle: best light-cone margin over all X solving Theta X / 2 = w (1, y), for two outcomes.

    Scans the affine solution set (particular solution plus ker Theta) on a grid;
    a positive margin means both X and (2, 0, 0, 0) - X are positive.
    """
    (w, y), _ = targets
    U, s, Vt = np.linalg.svd(th.matrix)
    K = Vt[np.sum(s > 1e-8):].T
    X0 = np.linalg.lstsq(th.matrix, 2 * w * np.concatenate([[1.0], y]), rcond=None)[0]
    g = np.linspace(-3, 3, 301)
    coeffs = np.stack(np.meshgrid(*[g] * K.shape[1]), axis=-1).reshape(-1, K.shape[1])
    X = X0 + coeffs @ K.T
    Y = np.array([2.0, 0, 0, 0]) - X
    cone = lambda Z: Z[:, 0] - np.linalg.norm(Z[:, 1:], axis=1)
    return float(np.max(np.minimum(cone(X), cone(Y))))


def test_decomposition_incomplete_example_matches_brute_force(needle_example):
    th = to_theta(needle_example)
    scaled = np.linalg.norm(th.b)
    for t in np.linspace(0.1, 1.0, 10):
        targets = [(0.5, [0, 0, t]), (0.5, [0, 0, -t])]
        margin = brute_force_margin(th, targets)
        if abs(t - scaled) < 0.02:
            continue
        if margin > 0:
            povm = steer_to_decomposition(th, targets)
            assert np.abs(steer(th, povm.elements[0]).y - [0, 0, t]).max() < 1e-9
        else:
            with pytest.raises(Unreachable, match="kernel"):
                steer_to_decomposition(th, targets)
    # the surface decomposition is out of reach
    with pytest.raises(Unreachable):
        steer_to_decomposition(th, [(0.5, [0, 0, 1]), (0.5, [0, 0, -1])])


def test_decomposition_rejects_bad_targets():
    th = to_theta(werner(0.5))
    with pytest.raises(BadDecomposition, match="average"):
        steer_to_decomposition(th, [(1.0, [0, 0, 0.1])])
    with pytest.raises(BadDecomposition, match="outside"):
        steer_to_decomposition(th, [(0.5, [0, 0, 0.6]), (0.5, [0, 0, -0.6])])
    with pytest.raises(BadDecomposition, match="sum"):
        steer_to_decomposition(th, [(0.7, [0, 0, 0.1]), (0.7, [0, 0, -0.1])])


@given(states(), seeds, st.integers(2, 6))
def test_decomposition_reproduces_projective_ensembles(rho, seed, k):
    """Any ensemble produced by a real measurement must be reachable and reproduced."""
    th = to_theta(rho)
    if np.linalg.norm(th.b) > 0.999:
        return
    rng = np.random.default_rng(seed)
    # a random k-outcome POVM from a random unitary's columns
    q = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))[0][:2]
    X = np.array([[np.trace(np.outer(c, c.conj()) @ s).real for s in SIGMA] for c in q.T])
    p, ys = steer_many(th, X)
    keep = p > 1e-6
    targets = [(w, y) for w, y in zip(p[keep] / p[keep].sum(), ys[keep])]
    povm = steer_to_decomposition(th, targets)
    assert np.abs(povm.elements.sum(axis=0) - [2, 0, 0, 0]).max() < 1e-10
    for (w, y), x in zip(targets, povm.elements):
        out = steer(th, x)
        assert abs(out.p - w) < 1e-8 and np.abs(out.y - y).max() < 1e-7


def test_hull_oracle_werner():
    rep = mc_hull_oracle(to_theta(werner(0.5)), 10_000, seed=0)
    assert rep.max_violation < 1e-6 and rep.max_surface_deviation < 1e-6
    assert rep.min_coverage_gap < 0.02
    finer = mc_hull_oracle(to_theta(werner(0.5)), 40_000, seed=0)
    assert finer.min_coverage_gap < rep.min_coverage_gap


def test_hull_oracle_product_is_single_point():
    rep = mc_hull_oracle(to_theta(product_state([0.1, 0.2, 0.3], [0, 0.4, 0])), 100, seed=1)
    assert rep.max_violation < 1e-15 and rep.min_coverage_gap < 1e-15


def test_hull_oracle_family_extremes():
    th = to_theta(theta_family(np.pi / 2))
    rng = np.random.default_rng(0)
    v = uniform_sphere(10_000, rng)
    _, ys = steer_many(th, np.hstack([np.ones((10_000, 1)), v]))
    assert ys[:, 2].max() == pytest.approx(0.5 + 9 / 20, abs=1e-3)
    assert ys[:, 2].min() == pytest.approx(0.5 - 9 / 20, abs=1e-3)


def test_hull_oracle_is_partition_independent():
    th = to_theta(random_density(3, 8))
    reps = [mc_hull_oracle(th, 5000, seed=3, partitions=k) for k in (1, 3, 7)]
    assert all(r == reps[0] for r in reps)


def test_hull_oracle_rejects_small_n():
    with pytest.raises(ValueError):
        mc_hull_oracle(to_theta(werner(0.2)), 5)


def test_projector_directions_are_unit():
    rng = np.random.default_rng(0)
    b = np.array([0.1, -0.5, 0.8])
    for mode in ("uniform", "canonical"):
        v = projector_directions(b, 500, rng, mode)
        assert np.abs(np.linalg.norm(v, axis=1) - 1).max() < 1e-12
    with pytest.raises(ValueError):
        projector_directions(b, 5, rng, "other")


def test_canonical_sampling_is_uniform_after_the_boost():
    b = np.array([0, 0, 0.95])
    v = projector_directions(b, 20_000, np.random.default_rng(1))
    from qsteer.lorentz import boost

    X = np.hstack([np.ones((len(v), 1)), v]) @ boost(-b).T
    u = X[:, 1:] / X[:, :1]
    # the pulled-back directions are uniform again: mean near zero, each second moment near 1/3
    assert np.abs(u.mean(axis=0)).max() < 0.03
    assert np.abs((u * u).mean(axis=0) - 1 / 3).max() < 0.03


def test_canonical_sampling_covers_boosted_pure_state():
    psi = np.array([1, 0.3, 0.2, 0.05]) + 1j * np.array([0, 0.1, -0.2, 0])
    from qsteer.qstate import pure_state

    th = to_theta(pure_state(psi))
    assert np.linalg.norm(th.b) > 0.9
    uniform = mc_hull_oracle(th, 10_000, seed=0, sampling="uniform")
    canonical = mc_hull_oracle(th, 10_000, seed=0)
    assert canonical.max_violation < 1e-9 and uniform.max_violation < 1e-9
    assert canonical.min_coverage_gap < 0.02 < uniform.min_coverage_gap
