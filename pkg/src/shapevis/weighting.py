"""Landmark affinities from random walks on the neighbour graph.

For each landmark, ``beta`` walks of uniformly drawn length in
``[theta1, theta2]`` are run on the sampled-point graph; the walk endpoint is
credited to the landmark that covers it. Counts are thresholded and row
normalised into a transition matrix ``A``, which is then made symmetric as
``W = A + A^T - A * A^T`` (elementwise product).
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp
from numba import prange

from . import _rng
from .types import LandmarkCover, NeighborGraph, PipelineConfig, WeightedLandmarkGraph, symmetric_csr

_BLOCK = 2048


@dataclass(frozen=True, eq=False)
class WalkCountMatrix:
    """Endpoint counts ``n_ij`` (CSR, integer valued) and walks started per landmark."""

    counts: sp.csr_matrix
    row_totals: np.ndarray

    @classmethod
    def from_dense(cls, counts, row_totals=None) -> "WalkCountMatrix":
        c = np.asarray(counts, dtype=np.int64)
        totals = c.sum(axis=1) if row_totals is None else np.asarray(row_totals, dtype=np.int64)
        return cls(sp.csr_matrix(c), totals)

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    def toarray(self) -> np.ndarray:
        return self.counts.toarray().astype(np.int64)


@numba.njit(cache=True, parallel=True)
def _walk_block(indptr, indices, starts, rev_neigh, first, beta, theta1, theta2, seed):
    nb = starts.shape[0]
    ends = np.empty((nb, beta), dtype=np.int32)
    span = theta2 - theta1 + 1
    for b in prange(nb):
        lid = first + b
        for w in range(beta):
            state = _rng.stream_seed(seed, lid, w)
            steps = theta1 + _rng.randint(state, span)
            pos = starts[b]
            for _ in range(steps):
                state = _rng.next_state(state)
                lo = indptr[pos]
                deg = indptr[pos + 1] - lo
                if deg == 0:
                    break
                pos = indices[lo + _rng.randint(state, deg)]
            ends[b, w] = rev_neigh[pos]
        ends[b].sort()
    return ends


def run_walks(
    g: NeighborGraph,
    cover: LandmarkCover,
    cfg: PipelineConfig,
    seed: int | None = None,
    theta: tuple[int, int] | None = None,
) -> WalkCountMatrix:
    """Count walk endpoints per (start landmark, covering landmark).

    Every walk gets its own random stream keyed by ``(seed, landmark, walk)``,
    so counts do not depend on the thread count. Self transitions are zeroed
    unless ``cfg.keep_self_transitions``; ``row_totals`` still counts them.
    """
    seed = cfg.seed if seed is None else seed
    theta1, theta2 = theta if theta is not None else (cfg.theta1, cfg.theta2)
    if not 0 <= theta1 <= theta2:
        raise ValueError("need 0 <= theta1 <= theta2")
    beta = int(cfg.beta)
    if beta < 1:
        raise ValueError("beta must be >= 1")
    # int32 halves the footprint of the randomly accessed adjacency
    indptr, indices = (a.astype(np.int32) for a in g.csr)
    rev_neigh = cover.rev_neigh.astype(np.int32)
    n_land = cover.size
    rows, cols, vals = [], [], []
    for first in range(0, n_land, _BLOCK):
        starts = cover.landmarks[first : first + _BLOCK].astype(np.int32)
        ends = _walk_block(
            indptr, indices, starts, rev_neigh, first, beta, theta1, theta2, np.uint64(seed)
        )
        # rows are sorted: run-length encode each one
        r = np.repeat(np.arange(first, first + len(starts), dtype=np.int64), beta)
        c = ends.reshape(-1).astype(np.int64)
        head = np.ones(len(c), dtype=bool)
        head[1:] = (c[1:] != c[:-1]) | (r[1:] != r[:-1])
        pos = np.flatnonzero(head)
        rows.append(r[pos])
        cols.append(c[pos])
        vals.append(np.diff(np.append(pos, len(c))))
    r = np.concatenate(rows) if rows else np.empty(0, np.int64)
    c = np.concatenate(cols) if cols else np.empty(0, np.int64)
    v = np.concatenate(vals) if vals else np.empty(0, np.int64)
    if not cfg.keep_self_transitions:
        off = r != c
        r, c, v = r[off], c[off], v[off]
    counts = sp.csr_matrix((v.astype(np.int64), (r, c)), shape=(n_land, n_land))
    counts.sort_indices()
    return WalkCountMatrix(counts, np.full(n_land, beta, dtype=np.int64))


def transition_matrix(n: WalkCountMatrix, th: float) -> sp.csr_matrix:
    """``a_ij = n_ij / walks_i`` where ``n_ij >= th``, else 0.

    The denominator is the number of walks started at ``i`` (the raw row
    total before thresholding or self exclusion), so rows sum to at most 1.
    """
    if th < 0:
        raise ValueError("th must be >= 0")
    c = n.counts.tocoo()
    totals = n.row_totals.astype(np.float64)
    keep = (c.data >= th) & (totals[c.row] > 0)
    data = c.data[keep].astype(np.float64) / totals[c.row[keep]]
    a = sp.csr_matrix((data, (c.row[keep], c.col[keep])), shape=c.shape)
    a.eliminate_zeros()
    a.sort_indices()
    return a


def symmetrize(a) -> WeightedLandmarkGraph:
    """``w_ij = a_ij + a_ji - a_ij * a_ji`` computed once per pair and mirrored."""
    a = sp.csr_matrix(a, dtype=np.float64)
    n = a.shape[0]
    coo = a.tocoo()
    off = coo.row != coo.col
    r, c, v = coo.row[off], coo.col[off], coo.data[off]
    if v.size and (v.min() < 0 or v.max() > 1):
        raise ValueError("transition entries must lie in [0, 1]")
    lo, hi = np.minimum(r, c), np.maximum(r, c)
    key = lo.astype(np.int64) * n + hi
    order = np.argsort(key, kind="stable")
    key, r, v = key[order], r[order], v[order]
    uniq = np.unique(key)
    fwd = np.zeros(len(uniq))  # a_{lo,hi}
    bwd = np.zeros(len(uniq))  # a_{hi,lo}
    slot = np.searchsorted(uniq, key)
    is_fwd = r == (key // n)
    fwd[slot[is_fwd]] = v[is_fwd]
    bwd[slot[~is_fwd]] = v[~is_fwd]
    w = fwd + bwd - fwd * bwd
    return WeightedLandmarkGraph(symmetric_csr(uniq // n, uniq % n, w, n))


def landmark_graph(g: NeighborGraph, cover: LandmarkCover, cfg: PipelineConfig) -> WeightedLandmarkGraph:
    return symmetrize(transition_matrix(run_walks(g, cover, cfg), cfg.th))
