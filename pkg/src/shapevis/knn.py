"""k-nearest-neighbour search over the sampled points.

``exact_knn`` is a brute-force scan with smallest-id tie breaking and serves
both as the small-input path and as the test oracle. ``nn_descent_knn`` is a
neighbour-of-neighbour refinement for large inputs; every point only ever
writes its own list, which keeps it deterministic at any thread count.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numba
import numpy as np
from numba import prange

from . import _rng
from .types import NeighborGraph

log = logging.getLogger(__name__)

EXACT_CUTOFF = 1000


@dataclass(frozen=True, eq=False)
class KnnResult:
    """Neighbour ids and Euclidean distances, one ascending row per point."""

    indices: np.ndarray
    distances: np.ndarray

    @property
    def k(self) -> int:
        return self.indices.shape[1]

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnnResult):
            return NotImplemented
        return np.array_equal(self.indices, other.indices) and np.array_equal(
            self.distances, other.distances
        )


def recall(approx: KnnResult, exact: KnnResult) -> float:
    """Fraction of exact neighbours recovered by ``approx``."""
    hits = 0
    for a, e in zip(approx.indices, exact.indices):
        hits += len(np.intersect1d(a, e, assume_unique=True))
    return hits / exact.indices.size if exact.indices.size else 1.0


def _clamp_k(k: int, m: int) -> int:
    if k < 1:
        raise ValueError("k must be >= 1")
    if k >= m:
        if m > 1:
            warnings.warn(f"k={k} >= number of points {m}; clamping to {m - 1}", stacklevel=3)
        return max(m - 1, 0)
    return k


def set_threads(threads: int) -> int:
    """Cap numba's worker pool; returns the count actually used."""
    n = max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


# ---------------------------------------------------------------------------
# exact


@numba.njit(cache=True, inline="always")
def _sqdist(a, b):
    s = 0.0
    for t in range(a.shape[0]):
        diff = a[t] - b[t]
        s += diff * diff
    return s


@numba.njit(cache=True, parallel=True)
def _scan_kernel(data, queries, k, exclude_self):
    nq = queries.shape[0]
    n = data.shape[0]
    ind = np.full((nq, k), -1, dtype=np.int64)
    dist = np.full((nq, k), np.inf)
    for q in prange(nq):
        di = dist[q]
        ii = ind[q]
        for j in range(n):
            if exclude_self and j == q:
                continue
            d = _sqdist(queries[q], data[j])
            # ids arrive ascending, so a strict test keeps the smaller id on ties
            if d < di[k - 1]:
                p = k - 1
                while p > 0 and di[p - 1] > d:
                    di[p] = di[p - 1]
                    ii[p] = ii[p - 1]
                    p -= 1
                di[p] = d
                ii[p] = j
    return ind, dist


def exact_knn(points, k: int) -> KnnResult:
    """Exact Euclidean k-NN of every point among the others.

    Ties are broken by the smaller point id. ``k >= M`` is clamped to
    ``M - 1`` with a warning.
    """
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    k = _clamp_k(k, x.shape[0])
    if k == 0:
        return KnnResult(np.empty((x.shape[0], 0), np.int64), np.empty((x.shape[0], 0)))
    ind, dist = _scan_kernel(x, x, k, True)
    return KnnResult(ind, np.sqrt(dist))


def exact_query(data, queries, k: int) -> KnnResult:
    """Exact k-NN of each query row among ``data`` rows (no self exclusion)."""
    x = np.ascontiguousarray(data, dtype=np.float64)
    q = np.ascontiguousarray(queries, dtype=np.float64)
    k = min(k, x.shape[0])
    if k == 0 or q.shape[0] == 0:
        return KnnResult(np.empty((q.shape[0], k), np.int64), np.empty((q.shape[0], k)))
    ind, dist = _scan_kernel(x, q, k, False)
    return KnnResult(ind, np.sqrt(dist))


# ---------------------------------------------------------------------------
# random projection tree (initialisation and search entry points)


@dataclass(frozen=True)
class RPTree:
    normals: np.ndarray  # (n_internal, d)
    offsets: np.ndarray
    children: np.ndarray  # (n_nodes, 2); leaves use -1
    node_ref: np.ndarray  # internal -> row in normals, leaf -> leaf id
    leaf_bounds: np.ndarray  # (n_leaves + 1,)
    leaf_points: np.ndarray


def build_rp_tree(points: np.ndarray, leaf_size: int, rng: np.random.Generator) -> RPTree:
    """Random-hyperplane tree; splits on the bisector of two random points."""
    n, d = points.shape
    normals, offsets, children, node_ref = [], [], [], []
    leaves: list[np.ndarray] = []
    stack = [(np.arange(n), -1, 0)]
    while stack:
        idx, parent, side = stack.pop()
        node = len(children)
        children.append([-1, -1])
        if parent >= 0:
            children[parent][side] = node
        if len(idx) <= leaf_size:
            node_ref.append(len(leaves))
            leaves.append(idx)
            continue
        a, b = rng.choice(len(idx), 2, replace=False)
        pa, pb = points[idx[a]], points[idx[b]]
        normal = pa - pb
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            normal = rng.standard_normal(d)
            norm = np.linalg.norm(normal)
        normal /= norm
        offset = float(normal @ ((pa + pb) / 2.0))
        proj = points[idx] @ normal - offset
        left = proj <= 0.0
        if left.all() or not left.any():
            # duplicates or a degenerate split: halve at random instead
            left = np.zeros(len(idx), dtype=bool)
            left[rng.permutation(len(idx))[: len(idx) // 2]] = True
            offset = np.inf
        node_ref.append(len(normals))
        normals.append(normal)
        offsets.append(offset)
        stack.append((idx[~left], node, 1))
        stack.append((idx[left], node, 0))
    bounds = np.zeros(len(leaves) + 1, dtype=np.int64)
    np.cumsum([len(lf) for lf in leaves], out=bounds[1:])
    return RPTree(
        np.asarray(normals, dtype=np.float64).reshape(-1, d),
        np.asarray(offsets, dtype=np.float64),
        np.asarray(children, dtype=np.int64).reshape(-1, 2),
        np.asarray(node_ref, dtype=np.int64),
        bounds,
        np.concatenate(leaves).astype(np.int64) if leaves else np.empty(0, np.int64),
    )


@numba.njit(cache=True)
def _tree_leaf(q, normals, offsets, children, node_ref, seed, qid):
    node = 0
    state = _rng.stream_seed(seed, qid, 7)
    while children[node, 0] >= 0:
        r = node_ref[node]
        off = offsets[r]
        if np.isinf(off):
            go_left = _rng.uniform(state) < 0.5
            state = _rng.next_state(state)
        else:
            s = 0.0
            for t in range(q.shape[0]):
                s += q[t] * normals[r, t]
            go_left = s - off <= 0.0
        node = children[node, 0] if go_left else children[node, 1]
    return node_ref[node]


# ---------------------------------------------------------------------------
# NN-descent


@numba.njit(cache=True, inline="always")
def _try_insert(di, ii, fi, d, j):
    """Insert ``(d, j)`` into a sorted row if it improves it; returns 1 on change."""
    k = di.shape[0]
    if d > di[k - 1] or (d == di[k - 1] and j >= ii[k - 1]):
        return 0
    for t in range(k):
        if ii[t] == j:
            return 0
    p = k - 1
    while p > 0 and (di[p - 1] > d or (di[p - 1] == d and ii[p - 1] > j)):
        di[p] = di[p - 1]
        ii[p] = ii[p - 1]
        fi[p] = fi[p - 1]
        p -= 1
    di[p] = d
    ii[p] = j
    fi[p] = True
    return 1


@numba.njit(cache=True, parallel=True)
def _init_from_leaves(data, ind, dist, flag, leaf_bounds, leaf_points, leaf_of):
    n = data.shape[0]
    for v in prange(n):
        lf = leaf_of[v]
        for t in range(leaf_bounds[lf], leaf_bounds[lf + 1]):
            j = leaf_points[t]
            if j != v:
                _try_insert(dist[v], ind[v], flag[v], _sqdist(data[v], data[j]), j)


@numba.njit(cache=True, parallel=True)
def _fill_random(data, ind, dist, flag, seed):
    n, k = ind.shape
    for v in prange(n):
        state = _rng.stream_seed(seed, v, 1)
        tries = 0
        while ind[v, k - 1] < 0 and tries < 8 * k:
            j = _rng.randint(state, n)
            state = _rng.next_state(state)
            tries += 1
            if j != v:
                _try_insert(dist[v], ind[v], flag[v], _sqdist(data[v], data[j]), j)


@numba.njit(cache=True)
def _build_candidates(ind, flag, cap, seed, it):
    """Sampled forward and reverse candidate lists, split into new and old.

    Sampling keeps the ``cap`` entries of smallest hash priority, so the
    choice is a pure function of ``(seed, it, v, u)``.
    """
    n, k = ind.shape
    new_c = np.full((n, 2 * cap), -1, dtype=np.int64)
    old_c = np.full((n, 2 * cap), -1, dtype=np.int64)
    new_p = np.full((n, 2 * cap), np.inf)
    old_p = np.full((n, 2 * cap), np.inf)
    for v in range(n):
        for t in range(k):
            u = ind[v, t]
            if u < 0:
                continue
            pr = _rng.uniform(_rng.stream_seed(seed, it * n + v, u))
            if flag[v, t]:
                cands, prios = new_c, new_p
            else:
                cands, prios = old_c, old_p
            # forward slot range [0, cap), reverse slot range [cap, 2cap)
            _keep_smallest(cands[v, :cap], prios[v, :cap], u, pr)
            _keep_smallest(cands[u, cap:], prios[u, cap:], v, pr)
    # sampled new forward entries become old
    for v in range(n):
        for t in range(k):
            if flag[v, t]:
                u = ind[v, t]
                for s in range(cap):
                    if new_c[v, s] == u:
                        flag[v, t] = False
                        break
    return new_c, old_c


@numba.njit(cache=True, inline="always")
def _keep_smallest(cands, prios, u, pr):
    m = cands.shape[0]
    if pr >= prios[m - 1]:
        return
    for t in range(m):
        if cands[t] == u:
            return
    p = m - 1
    while p > 0 and prios[p - 1] > pr:
        prios[p] = prios[p - 1]
        cands[p] = cands[p - 1]
        p -= 1
    prios[p] = pr
    cands[p] = u


@numba.njit(cache=True, parallel=True)
def _local_join(data, ind, dist, flag, new_c, old_c):
    n = data.shape[0]
    width = new_c.shape[1]
    changes = np.zeros(n, dtype=np.int64)
    for v in prange(n):
        c = 0
        for a in range(2 * width):
            u = new_c[v, a] if a < width else old_c[v, a - width]
            if u < 0:
                continue
            u_new = a < width
            for b in range(2 * width):
                w = new_c[u, b] if b < width else old_c[u, b - width]
                if w < 0 or w == v:
                    continue
                if not u_new and b >= width:
                    continue
                c += _try_insert(dist[v], ind[v], flag[v], _sqdist(data[v], data[w]), w)
        changes[v] = c
    return changes.sum()


def nn_descent_knn(
    points,
    k: int,
    iters: int = 10,
    sample_rate: float = 0.5,
    seed: int = 0,
    delta: float = 0.001,
    leaf_size: int | None = None,
    n_trees: int | None = None,
    exact_cutoff: int = EXACT_CUTOFF,
) -> KnnResult:
    """Approximate k-NN by neighbour-of-neighbour refinement.

    Inputs with at most ``exact_cutoff`` points go to :func:`exact_knn`.
    Lists are seeded from a small random-projection forest, then refined for up to
    ``iters`` rounds; a round changing fewer than ``delta * M * k`` entries
    ends the loop.
    """
    x = np.ascontiguousarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    m = x.shape[0]
    if m <= exact_cutoff:
        return exact_knn(x, k)
    k = _clamp_k(k, m)
    ind = np.full((m, k), -1, dtype=np.int64)
    dist = np.full((m, k), np.inf)
    flag = np.zeros((m, k), dtype=np.bool_)

    rng = np.random.default_rng(seed)
    if n_trees is None:
        n_trees = min(32, 5 + int(round(np.log2(m) / 4)))
    for _ in range(n_trees):
        tree = build_rp_tree(x, leaf_size or max(2 * k, 30), rng)
        leaf_of = np.empty(m, dtype=np.int64)
        for lf in range(len(tree.leaf_bounds) - 1):
            leaf_of[tree.leaf_points[tree.leaf_bounds[lf] : tree.leaf_bounds[lf + 1]]] = lf
        _init_from_leaves(x, ind, dist, flag, tree.leaf_bounds, tree.leaf_points, leaf_of)
    _fill_random(x, ind, dist, flag, np.uint64(seed))

    cap = max(1, int(round(sample_rate * k)))
    for it in range(iters):
        new_c, old_c = _build_candidates(ind, flag, cap, np.uint64(seed), it + 1)
        changed = _local_join(x, ind, dist, flag, new_c, old_c)
        log.debug("nn-descent round %d: %d updates", it, changed)
        if changed < delta * m * k:
            break
    return KnnResult(ind, np.sqrt(dist))


# ---------------------------------------------------------------------------
# graph-guided queries


@numba.njit(cache=True)
def _beam_search(data, q, indptr, indices, entries, ef, k, stamp, tag):
    pool_d = np.full(ef, np.inf)
    pool_i = np.full(ef, -1, dtype=np.int64)
    done = np.zeros(ef, dtype=np.bool_)
    for e in entries:
        if stamp[e] == tag:
            continue
        stamp[e] = tag
        _pool_insert(pool_d, pool_i, done, _sqdist(q, data[e]), e)
    while True:
        p = -1
        for t in range(ef):
            if pool_i[t] >= 0 and not done[t]:
                p = t
                break
        if p < 0:
            break
        done[p] = True
        v = pool_i[p]
        for s in range(indptr[v], indptr[v + 1]):
            u = indices[s]
            if stamp[u] == tag:
                continue
            stamp[u] = tag
            _pool_insert(pool_d, pool_i, done, _sqdist(q, data[u]), u)
    return pool_i[:k].copy(), pool_d[:k].copy()


@numba.njit(cache=True, inline="always")
def _pool_insert(pd, pi, done, d, j):
    m = pd.shape[0]
    if d > pd[m - 1] or (d == pd[m - 1] and pi[m - 1] >= 0 and j > pi[m - 1]):
        return
    p = m - 1
    while p > 0 and (pd[p - 1] > d or (pd[p - 1] == d and pi[p - 1] > j)):
        pd[p] = pd[p - 1]
        pi[p] = pi[p - 1]
        done[p] = done[p - 1]
        p -= 1
    pd[p] = d
    pi[p] = j
    done[p] = False


@numba.njit(cache=True, parallel=True)
def _search_many(
    data, queries, indptr, indices, normals, offsets, children, node_ref,
    leaf_bounds, leaf_points, ef, k, seed, n_chunks,
):
    nq = queries.shape[0]
    n = data.shape[0]
    out_i = np.full((nq, k), -1, dtype=np.int64)
    out_d = np.full((nq, k), np.inf)
    chunk = (nq + n_chunks - 1) // n_chunks
    for c in prange(n_chunks):
        stamp = np.full(n, -1, dtype=np.int64)
        for q in range(c * chunk, min(nq, (c + 1) * chunk)):
            lf = _tree_leaf(queries[q], normals, offsets, children, node_ref, seed, q)
            entries = leaf_points[leaf_bounds[lf] : leaf_bounds[lf + 1]]
            ii, dd = _beam_search(data, queries[q], indptr, indices, entries, ef, k, stamp, q)
            out_i[q] = ii
            out_d[q] = dd
    return out_i, out_d


def graph_query(
    data,
    queries,
    graph: NeighborGraph,
    k: int,
    ef: int = 48,
    seed: int = 0,
    leaf_size: int = 32,
) -> KnnResult:
    """Approximate k-NN of queries among ``data`` by best-first graph search.

    The search starts from the query's leaf in a random-projection tree over
    ``data`` and walks ``graph`` (one node per data row), so separated
    clusters are reached even when the graph is disconnected.
    """
    x = np.ascontiguousarray(data, dtype=np.float64)
    q = np.ascontiguousarray(queries, dtype=np.float64)
    k = min(k, x.shape[0])
    tree = build_rp_tree(x, leaf_size, np.random.default_rng(seed))
    indptr, indices = graph.csr
    ind, dist = _search_many(
        x, q, indptr, indices, tree.normals, tree.offsets, tree.children, tree.node_ref,
        tree.leaf_bounds, tree.leaf_points, max(ef, k), k, np.uint64(seed), 64,
    )
    return KnnResult(ind, np.sqrt(dist))


def knn_to_graph(result: KnnResult, sample_map=None) -> NeighborGraph:
    """Union-symmetrise neighbour lists into an undirected graph."""
    m = len(result)
    rows = np.repeat(np.arange(m, dtype=np.int64), result.k)
    cols = result.indices.reshape(-1)
    keep = cols >= 0
    pairs = np.stack([rows[keep], cols[keep]], axis=1)
    return NeighborGraph.from_pairs(m, pairs, sample_map)


def build_knn(points, k: int, method: str = "auto", iters: int = 10,
              sample_rate: float = 0.5, seed: int = 0) -> KnnResult:
    if method not in ("auto", "exact", "nndescent"):
        raise ValueError(f"unknown knn method {method!r}")
    if method == "exact":
        return exact_knn(points, k)
    cutoff = EXACT_CUTOFF if method == "auto" else 0
    return nn_descent_knn(points, k, iters, sample_rate, seed, exact_cutoff=cutoff)
