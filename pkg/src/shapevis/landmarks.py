"""Point sampling, 1-witness augmentation and the greedy landmark cover."""

from __future__ import annotations

import logging
import warnings

import numba
import numpy as np

from .knn import KnnResult, exact_query, graph_query
from .types import LandmarkCover, NeighborGraph, PipelineConfig, PointCloud

log = logging.getLogger(__name__)


def sample_points(pc: PointCloud, cfg: PipelineConfig, seed: int | None = None):
    """Uniformly sample ``min(m_cap, ceil(N * m_fraction))`` rows.

    Returns ``(sample, complement)`` as sorted index arrays.
    """
    n = pc.n
    if n < 1:
        raise ValueError("empty point cloud")
    m = max(1, cfg.sample_size(n))
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    chosen = np.zeros(n, dtype=bool)
    chosen[rng.choice(n, size=m, replace=False)] = True
    return np.flatnonzero(chosen), np.flatnonzero(~chosen)


def witness_neighbors(
    g: NeighborGraph,
    pc: PointCloud,
    complement,
    exact: bool | None = None,
    exact_limit: int = 1000,
    seed: int = 0,
) -> KnnResult:
    """Two nearest sampled nodes for every complement point.

    Small samples (``node_count <= exact_limit``) use an exhaustive scan with
    smallest-id tie breaking; larger ones use graph-guided search on ``g``.
    """
    complement = np.asarray(complement, dtype=np.int64)
    sample_x = pc.data[g.sample_map]
    queries = pc.data[complement]
    if exact is None:
        exact = g.node_count <= exact_limit
    if exact:
        return exact_query(sample_x, queries, 2)
    return graph_query(sample_x, queries, g, 2, seed=seed)


def witness_augment(
    g: NeighborGraph,
    pc: PointCloud,
    complement,
    exact: bool | None = None,
    exact_limit: int = 1000,
    seed: int = 0,
    nearest: KnnResult | None = None,
) -> NeighborGraph:
    """Add the edge ``{p, q}`` for every witness whose two nearest samples are p, q."""
    complement = np.asarray(complement, dtype=np.int64)
    if len(complement) == 0:
        return g
    if g.node_count < 2:
        warnings.warn("fewer than 2 sampled points; witness augmentation skipped", stacklevel=2)
        return g
    if nearest is None:
        nearest = witness_neighbors(g, pc, complement, exact, exact_limit, seed)
    pairs = nearest.indices[:, :2]
    pairs = pairs[(pairs >= 0).all(axis=1)]
    return NeighborGraph(g.node_count, np.concatenate([g.edges, pairs]), g.sample_map)


@numba.njit(cache=True)
def _greedy_cover(indptr, indices, order, hops):
    n = indptr.shape[0] - 1
    owner = np.full(n, -1, dtype=np.int64)
    landmarks = np.empty(n, dtype=np.int64)
    n_land = 0
    frontier = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    seen = np.full(n, -1, dtype=np.int64)
    for x in order:
        if owner[x] >= 0:
            continue
        pos = n_land
        landmarks[n_land] = x
        n_land += 1
        owner[x] = pos
        seen[x] = pos
        frontier[0] = x
        fsize = 1
        for _ in range(hops):
            nsize = 0
            for f in range(fsize):
                v = frontier[f]
                for s in range(indptr[v], indptr[v + 1]):
                    u = indices[s]
                    if seen[u] == pos:
                        continue
                    seen[u] = pos
                    # first landmark to reach a node keeps it
                    if owner[u] < 0:
                        owner[u] = pos
                    nxt[nsize] = u
                    nsize += 1
            frontier, nxt = nxt, frontier
            fsize = nsize
            if fsize == 0:
                break
    return landmarks[:n_land].copy(), owner


def select_landmarks(
    g: NeighborGraph, k_prime_hops: int = 1, seed: int = 0, order=None
) -> LandmarkCover:
    """Greedy cover: pick a random unmarked node, claim its hop neighbourhood.

    Visiting a uniform random permutation and skipping marked nodes is the
    same as drawing uniformly among the unmarked ones at every step. ``order``
    overrides the permutation.
    """
    if k_prime_hops < 1:
        raise ValueError("k_prime_hops must be >= 1")
    if order is None:
        order = np.random.default_rng(seed).permutation(g.node_count)
    order = np.asarray(order, dtype=np.int64)
    indptr, indices = g.csr
    landmarks, owner = _greedy_cover(indptr, indices, order, k_prime_hops)
    if (owner < 0).any():
        raise ValueError("order does not visit every node")
    return LandmarkCover(landmarks, owner)
