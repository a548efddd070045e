import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import endpoint_distribution
from shapevis.knn import set_threads
from shapevis.landmarks import select_landmarks
from shapevis.types import NeighborGraph, PipelineConfig
from shapevis.weighting import WalkCountMatrix, run_walks, symmetrize, transition_matrix


def test_threshold_and_normalisation_by_walks_started():
    n = WalkCountMatrix.from_dense([[0, 3, 1], [2, 0, 8], [0, 0, 0]], row_totals=[10, 10, 10])
    a = transition_matrix(n, th=2).toarray()
    assert a.tolist() == [[0, 0.3, 0], [0.2, 0, 0.8], [0, 0, 0]]


def test_symmetrize_hand_value():
    w = symmetrize(np.array([[0, 0.5], [0.2, 0]]))
    assert w.weight(0, 1) == pytest.approx(0.6, abs=0, rel=1e-15)
    assert w.weights[0, 1] == w.weights[1, 0]


def test_symmetrize_one_sided():
    w = symmetrize(np.array([[0, 0.0], [0.25, 0]]))
    assert w.weight(0, 1) == 0.25


def test_symmetrize_rejects_out_of_range():
    with pytest.raises(ValueError):
        symmetrize(np.array([[0, 1.5], [0, 0]]))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 25), st.integers(0, 10_000))
def test_symmetrize_properties(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.random((n, n)) * (rng.random((n, n)) < 0.3)
    w = symmetrize(a).weights.toarray()
    expect = a + a.T - a * a.T
    np.fill_diagonal(expect, 0)
    assert np.array_equal(w, w.T)
    assert np.allclose(w, expect, rtol=0, atol=1e-15)
    assert (w >= 0).all() and (w <= 1).all()


def _cycle(n):
    return NeighborGraph.from_pairs(n, [(i, (i + 1) % n) for i in range(n)])


def test_walk_counts_match_markov_oracle():
    g = _cycle(6)
    cov = select_landmarks(g, 1, order=[0, 3, 1, 2, 4, 5])
    cfg = PipelineConfig(beta=20_000, walk_len=6, keep_self_transitions=True)
    counts = run_walks(g, cov, cfg, seed=3)
    est = counts.toarray() / cfg.beta
    exact = endpoint_distribution(g, cov, cfg.theta1, cfg.theta2)
    assert np.abs(est - exact).max() < 0.02


def test_self_transitions_dropped_but_counted_in_totals():
    g = _cycle(6)
    cov = select_landmarks(g, 1, order=[0, 3, 1, 2, 4, 5])
    counts = run_walks(g, cov, PipelineConfig(beta=500, walk_len=6), seed=1)
    assert counts.counts.diagonal().sum() == 0
    assert counts.row_totals.tolist() == [500, 500]
    assert counts.toarray().sum(axis=1).max() <= 500


def test_walks_thread_invariant_and_seeded():
    rng = np.random.default_rng(0)
    pairs = np.argwhere(np.triu(rng.random((300, 300)) < 0.02, 1))
    g = NeighborGraph.from_pairs(300, pairs)
    cov = select_landmarks(g, 1, seed=0)
    cfg = PipelineConfig(beta=200)
    set_threads(1)
    a = run_walks(g, cov, cfg, seed=5).toarray()
    set_threads(4)
    b = run_walks(g, cov, cfg, seed=5).toarray()
    c = run_walks(g, cov, cfg, seed=6).toarray()
    set_threads(1)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_bad_theta():
    g = _cycle(4)
    cov = select_landmarks(g, 1, seed=0)
    with pytest.raises(ValueError):
        run_walks(g, cov, PipelineConfig(), theta=(5, 3))
