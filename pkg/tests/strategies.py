"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from qsteer.qstate import random_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)
ranks = st.integers(min_value=1, max_value=4)


@st.composite
def states(draw, rank=None):
    r = draw(ranks) if rank is None else rank
    return random_density(r, draw(seeds))


@st.composite
def bloch_vectors(draw, max_norm=0.99):
    v = np.array(draw(st.lists(st.floats(-1, 1), min_size=3, max_size=3)))
    n = np.linalg.norm(v)
    r = draw(st.floats(0, max_norm))
    return v / n * r if n > 1e-6 else np.zeros(3)


@st.composite
def rotations(draw):
    rng = np.random.default_rng(draw(seeds))
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q
