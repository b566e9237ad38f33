import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from qecc_lab import _kernels
from qecc_lab.matching import DefectGraph, brute_force_min_matching, min_weight_perfect_matching

BACKENDS = ["python"]
try:
    _kernels.get_backend("cython")
    BACKENDS.append("cython")
except ImportError:
    pass


def _random_weights(rng, n, p_edge=0.8, wmax=20):
    W = np.full((n, n), -1, dtype=np.int64)
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                W[i, j] = W[j, i] = rng.integers(0, wmax + 1)
    return W


@pytest.mark.parametrize("backend", BACKENDS)
def test_exhaustive_against_brute_force(backend):
    kern = _kernels.get_backend(backend)
    rng = np.random.default_rng(2024)
    checked = 0
    for trial in range(1000):
        n = 2 * int(rng.integers(1, 5))
        W = _random_weights(rng, n, p_edge=rng.choice([0.4, 0.8, 1.0]), wmax=int(rng.choice([1, 5, 50])))
        ref = brute_force_min_matching(W)
        if ref is None:
            with pytest.raises(ValueError):
                kern.min_weight_perfect_matching(W)
            continue
        mate = kern.min_weight_perfect_matching(W)
        pairs = [(i, int(mate[i])) for i in range(n) if i < mate[i]]
        assert len(pairs) == n // 2
        assert all(W[i, j] >= 0 for i, j in pairs)
        assert sum(int(W[i, j]) for i, j in pairs) == ref[1]
        checked += 1
    assert checked > 700


def test_k4_example():
    # K4 with edges (0,1)=1, (2,3)=1, everything else 5: pairing {01, 23} costs 2
    W = np.full((4, 4), 5, dtype=np.int64)
    np.fill_diagonal(W, -1)
    W[0, 1] = W[1, 0] = 1
    W[2, 3] = W[3, 2] = 1
    m = min_weight_perfect_matching(DefectGraph(W))
    assert m.pairs == ((0, 1), (2, 3))
    assert m.total_weight == 2


def test_odd_and_empty():
    with pytest.raises(ValueError):
        min_weight_perfect_matching(DefectGraph(np.zeros((3, 3), dtype=np.int64)))
    assert min_weight_perfect_matching(DefectGraph(np.zeros((0, 0), dtype=np.int64))).pairs == ()


def test_no_perfect_matching():
    g = DefectGraph.from_edges(4, [(0, 1, 1), (0, 2, 1), (0, 3, 1)])
    with pytest.raises(ValueError):
        min_weight_perfect_matching(g)


def test_defect_graph_validation():
    with pytest.raises(ValueError):
        DefectGraph(np.array([[0, 1], [2, 0]]))
    with pytest.raises(ValueError):
        DefectGraph.from_edges(2, [(0, 1, -3)])


@pytest.mark.parametrize("backend", BACKENDS)
@given(seed=st.integers(0, 2**31), n=st.integers(2, 24), maxcard=st.booleans())
def test_max_weight_matching_against_networkx(backend, seed, n, maxcard):
    kern = _kernels.get_backend(backend)
    rng = np.random.default_rng(seed)
    edges = [(i, j, int(rng.integers(1, 30))) for i in range(n) for j in range(i + 1, n)
             if rng.random() < 0.5]
    mate = kern.max_weight_matching(n, edges, maxcard)
    G = nx.Graph()
    G.add_nodes_from(range(n))
    G.add_weighted_edges_from(edges)
    ref = nx.max_weight_matching(G, maxcardinality=maxcard)
    wmap = {(min(i, j), max(i, j)): w for i, j, w in edges}
    ours = [(i, int(mate[i])) for i in range(n) if 0 <= i < mate[i]]
    for i, j in ours:
        assert mate[j] == i
    assert sum(wmap[p] for p in ours) == sum(wmap[(min(a, b), max(a, b))] for a, b in ref)
    if maxcard:
        assert len(ours) == len(ref)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_identical_mates():
    py, cy = (_kernels.get_backend(b) for b in BACKENDS)
    rng = np.random.default_rng(99)
    for _ in range(300):
        n = 2 * int(rng.integers(1, 15))
        W = _random_weights(rng, n, p_edge=1.0, wmax=6)
        assert np.array_equal(py.min_weight_perfect_matching(W), cy.min_weight_perfect_matching(W))
