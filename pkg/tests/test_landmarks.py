import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import witness_pairs
from shapevis.knn import exact_knn, knn_to_graph
from shapevis.landmarks import sample_points, select_landmarks, witness_augment
from shapevis.types import NeighborGraph, PipelineConfig, PointCloud


def test_sample_size_and_disjoint_split():
    pc = PointCloud(np.zeros((100, 2)))
    s, c = sample_points(pc, PipelineConfig(), seed=1)
    assert len(s) == 34 and len(c) == 66
    assert sorted(np.concatenate([s, c]).tolist()) == list(range(100))


def test_sample_respects_cap():
    pc = PointCloud(np.zeros((100, 2)))
    s, _ = sample_points(pc, PipelineConfig(m_cap=5))
    assert len(s) == 5


def test_witness_adds_exact_two_nn_pairs():
    rng = np.random.default_rng(0)
    pc = PointCloud(rng.standard_normal((90, 3)))
    s, c = sample_points(pc, PipelineConfig(), seed=0)
    g = knn_to_graph(exact_knn(pc.data[s], 3), s)
    aug = witness_augment(g, pc, c)
    added = aug.edge_set() - g.edge_set()
    assert added <= witness_pairs(pc.data, s, c)
    assert aug.edge_set() == g.edge_set() | witness_pairs(pc.data, s, c)


def test_witness_skips_single_sample():
    pc = PointCloud(np.arange(8.0).reshape(4, 2))
    g = NeighborGraph.from_pairs(1, [], [0])
    with pytest.warns(UserWarning):
        assert witness_augment(g, pc, [1, 2, 3]) is g


def test_cover_path_with_fixed_order():
    g = NeighborGraph.from_pairs(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    cov = select_landmarks(g, 1, order=[1, 0, 2, 3, 4])
    assert cov.landmarks.tolist() == [1, 3]
    assert cov.rev_neigh.tolist() == [0, 0, 0, 1, 1]


def test_cover_two_hops():
    g = NeighborGraph.from_pairs(5, [(0, 1), (1, 2), (2, 3), (3, 4)])
    cov = select_landmarks(g, 2, order=[2, 0, 1, 3, 4])
    assert cov.landmarks.tolist() == [2]


def test_isolated_nodes_become_landmarks():
    g = NeighborGraph.from_pairs(3, [])
    cov = select_landmarks(g, 1, seed=4)
    assert sorted(cov.landmarks.tolist()) == [0, 1, 2]


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 0.3), st.integers(0, 1000), st.integers(1, 3))
def test_cover_is_a_partition(n, p, seed, hops):
    rng = np.random.default_rng(seed)
    iu = np.argwhere(np.triu(rng.random((n, n)) < p, 1))
    g = NeighborGraph.from_pairs(n, iu)
    cov = select_landmarks(g, hops, seed=seed)
    assert cov.check(n) == []
    for pos, lm in enumerate(cov.landmarks):
        assert cov.rev_neigh[lm] == pos
    # every covered node is within `hops` of its landmark
    dist = np.full((n, n), np.inf)
    np.fill_diagonal(dist, 0)
    for a, b in iu:
        dist[a, b] = dist[b, a] = 1
    for k in range(n):
        dist = np.minimum(dist, dist[:, [k]] + dist[[k], :])
    assert all(dist[x, cov.landmarks[cov.rev_neigh[x]]] <= hops for x in range(n))


def test_invalid_hops():
    with pytest.raises(ValueError):
        select_landmarks(NeighborGraph.from_pairs(2, [(0, 1)]), 0)


def test_witness_bridges_two_isolated_samples():
    pc = PointCloud(np.array([[0.0], [10.0], [5.0]]))
    g = NeighborGraph.from_pairs(2, [], [0, 1])
    assert witness_augment(g, pc, [2], exact=True).edge_set() == {(0, 1)}


def test_witness_augment_idempotent():
    rng = np.random.default_rng(1)
    pc = PointCloud(rng.standard_normal((60, 2)))
    s, c = sample_points(pc, PipelineConfig(), seed=2)
    g = knn_to_graph(exact_knn(pc.data[s], 3), s)
    once = witness_augment(g, pc, c)
    assert witness_augment(once, pc, c).edge_set() == once.edge_set()
