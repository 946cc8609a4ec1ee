import numpy as np
import pytest
from hypothesis import strategies as st

from causalscope import Smcg, random_graph, random_smbn


@st.composite
def small_smcgs(draw, max_n=6, K=2):
    """Arbitrary small valid graph: forward directed edges, any bidirected."""
    n = draw(st.integers(min_value=1, max_value=max_n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    if pairs:
        directed = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs)))
        bidirected = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=4))
    else:
        directed, bidirected = [], []
    return Smcg(n=n, K=K, directed=directed, bidirected=bidirected)


@st.composite
def prob_vector_pairs(draw, max_d=8):
    d = draw(st.integers(min_value=1, max_value=max_d))
    def vec():
        raw = draw(st.lists(st.floats(0.0, 1.0), min_size=d, max_size=d))
        arr = np.asarray(raw) + 1e-9
        return arr / arr.sum()
    return vec(), vec()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_instance(n, seed, d=2, l=2, K=2, alpha=1.0):
    g = random_graph(n, K, d, l, seed=seed)
    return g, random_smbn(g, alpha=alpha, seed=seed + 1)
