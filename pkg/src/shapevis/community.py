"""Louvain modularity optimisation and induced (quotient) graphs.

Self-loops follow the usual convention: a loop of weight ``w`` adds ``2w``
to its node's degree and to its community's internal weight, so aggregated
graphs have the same modularity as the graph they came from.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numba
import numpy as np
import scipy.sparse as sp

from . import _rng
from .types import InducedGraph, NodeMeta, Partition, relabel_contiguous

log = logging.getLogger(__name__)


def graph_parts(g) -> tuple[sp.csr_matrix, np.ndarray]:
    """Split any supported graph into (off-diagonal CSR, self-loop weights)."""
    if isinstance(g, InducedGraph):
        w = g.weights
        loops = g.self_weights.copy()
    else:
        w = g.weights if hasattr(g, "weights") else g
        w = sp.csr_matrix(w, dtype=np.float64)
        loops = w.diagonal().astype(np.float64)
    w = sp.csr_matrix(w, dtype=np.float64, copy=True)
    w.setdiag(0.0)
    w.eliminate_zeros()
    w.sort_indices()
    return w, np.asarray(loops, dtype=np.float64)


def modularity(g, part) -> float:
    """Newman-Girvan weighted modularity of ``part`` on ``g``.

    ``part`` may be a :class:`Partition` or an assignment array. A graph with
    zero total weight has modularity 0 (with a warning).
    """
    assignment = part.assignment if isinstance(part, Partition) else np.asarray(part)
    w, loops = graph_parts(g)
    deg = np.asarray(w.sum(axis=1)).ravel() + 2.0 * loops
    m2 = deg.sum()
    if m2 <= 0:
        warnings.warn("graph has zero total weight; modularity defined as 0", stacklevel=2)
        return 0.0
    comm = relabel_contiguous(assignment)
    n_comm = int(comm.max()) + 1 if len(comm) else 0
    coo = w.tocoo()
    same = comm[coo.row] == comm[coo.col]
    inner = np.bincount(comm[coo.row[same]], weights=coo.data[same], minlength=n_comm).astype(float)
    inner += np.bincount(comm, weights=2.0 * loops, minlength=n_comm)
    tot = np.bincount(comm, weights=deg, minlength=n_comm)
    return float(np.sum(inner / m2 - (tot / m2) ** 2))


@dataclass(frozen=True)
class Dendrogram:
    """Louvain levels; level 0 is the finest partition, all over original nodes."""

    levels: tuple

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, p: int) -> Partition:
        return self.levels[p]

    def partition(self, level: int) -> Partition:
        """Partition at ``level``, clamped to the coarsest available level."""
        return self.levels[min(level, len(self.levels) - 1)]


@numba.njit(cache=True)
def _local_moves(indptr, indices, data, loops, seed, level):
    n = indptr.shape[0] - 1
    deg = np.empty(n)
    for i in range(n):
        s = 2.0 * loops[i]
        for t in range(indptr[i], indptr[i + 1]):
            s += data[t]
        deg[i] = s
    m2 = deg.sum()
    comm = np.arange(n)
    tot = deg.copy()
    if m2 <= 0.0:
        return comm, 0
    neigh_w = np.zeros(n)
    neigh_c = np.empty(n, dtype=np.int64)
    order = np.arange(n)
    moved_any = 0
    it = 0
    while True:
        # fresh random sweep order for every pass
        state = _rng.stream_seed(seed, level, it)
        for i in range(n - 1, 0, -1):
            j = _rng.randint(state, i + 1)
            state = _rng.next_state(state)
            order[i], order[j] = order[j], order[i]
        it += 1
        moves = 0
        for i in order:
            ci = comm[i]
            ki = deg[i]
            n_nc = 0
            for t in range(indptr[i], indptr[i + 1]):
                c = comm[indices[t]]
                if neigh_w[c] == 0.0:
                    neigh_c[n_nc] = c
                    n_nc += 1
                neigh_w[c] += data[t]
            tot[ci] -= ki
            stay = neigh_w[ci] - tot[ci] * ki / m2
            best_c = ci
            best_g = stay
            tol = 1e-12 * (ki + 1e-300)
            for s in range(n_nc):
                c = neigh_c[s]
                if c == ci:
                    continue
                gain = neigh_w[c] - tot[c] * ki / m2
                if gain > stay + tol:
                    if gain > best_g or (gain == best_g and (best_c == ci or c < best_c)):
                        best_g = gain
                        best_c = c
            tot[best_c] += ki
            if best_c != ci:
                comm[i] = best_c
                moves += 1
            for s in range(n_nc):
                neigh_w[neigh_c[s]] = 0.0
        moved_any += moves
        if moves == 0:
            break
    return comm, moved_any


def _aggregate(w: sp.csr_matrix, loops: np.ndarray, comm: np.ndarray):
    n_comm = int(comm.max()) + 1
    ind = sp.csr_matrix(
        (np.ones(len(comm)), (np.arange(len(comm)), comm)), shape=(len(comm), n_comm)
    )
    agg = (ind.T @ w @ ind).tocsr()
    new_loops = agg.diagonal() / 2.0 + np.bincount(comm, weights=loops, minlength=n_comm)
    agg.setdiag(0.0)
    agg.eliminate_zeros()
    agg.sort_indices()
    return agg, new_loops


def louvain(g, seed: int = 0, max_levels: int = 64) -> Dendrogram:
    """Multi-level Louvain.

    Each level runs greedy local moves (a node joins the neighbouring
    community with the largest strictly positive gain; equal gains go to the
    smallest community id) and then aggregates communities into nodes. A
    level is recorded whenever moves changed the partition; the first level
    is always recorded, so an edgeless graph yields singletons.
    """
    w, loops = graph_parts(g)
    n = w.shape[0]
    if n == 0:
        return Dendrogram((Partition(np.empty(0, np.int64), 0),))
    node_of = np.arange(n)
    levels = []
    for lvl in range(max_levels):
        comm, moved = _local_moves(
            w.indptr.astype(np.int64), w.indices.astype(np.int64), w.data, loops, np.uint64(seed), lvl
        )
        if moved == 0 and levels:
            break
        comm = relabel_contiguous(comm)
        node_of = comm[node_of]
        levels.append(Partition(relabel_contiguous(node_of), lvl))
        if moved == 0:
            break
        w, loops = _aggregate(w, loops, comm)
        log.debug("louvain level %d: %d communities", lvl, w.shape[0])
    return Dendrogram(tuple(levels))


def induce(
    g,
    part,
    point_landmark=None,
    labels=None,
) -> InducedGraph:
    """Quotient graph of ``part``.

    ``point_landmark[r]`` names the landmark (node of ``g``) each raw point
    rolls up to; it drives ``point_count`` and the label histograms. Without
    it every node counts as one point and histograms are empty.
    """
    assignment = part.assignment if isinstance(part, Partition) else np.asarray(part, np.int64)
    w, loops = graph_parts(g)
    n = w.shape[0]
    if len(assignment) != n:
        raise ValueError("partition must cover every node of the graph")
    comm = assignment.astype(np.int64)
    if n and not Partition(comm).is_contiguous():
        comm = relabel_contiguous(comm)
    n_comm = int(comm.max()) + 1 if n else 0
    agg, self_w = _aggregate(w, loops, comm) if n else (sp.csr_matrix((0, 0)), np.zeros(0))

    order = np.argsort(comm, kind="stable")
    bounds = np.searchsorted(comm[order], np.arange(n_comm + 1))
    members = [order[bounds[c] : bounds[c + 1]] for c in range(n_comm)]
    if point_landmark is None:
        point_count = np.bincount(comm, minlength=n_comm)
        hist = [{} for _ in range(n_comm)]
    else:
        point_comm = comm[np.asarray(point_landmark, dtype=np.int64)]
        point_count = np.bincount(point_comm, minlength=n_comm)
        hist = [{} for _ in range(n_comm)]
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64)
            key = np.stack([point_comm, labels], axis=1)
            pairs, counts = np.unique(key, axis=0, return_counts=True)
            for (c, lab), cnt in zip(pairs.tolist(), counts.tolist()):
                hist[c][lab] = cnt
    return InducedGraph(agg, self_w, NodeMeta(members, point_count, hist))
