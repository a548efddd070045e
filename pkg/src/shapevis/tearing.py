"""Modularity-ordered tearing of the induced graph.

Phase one keeps, in descending edge-modularity order, only the edges that
join two components until the component count matches the induced graph.
Phase two revisits the discarded edges in the same order and restores an
edge when the loop it closes (the edge plus the fewest-hop path between its
endpoints in the current graph) has summed edge modularity of at least ``c``.

Edge modularity is the edge's additive share of Newman modularity,
``w / 2m - d_u * d_v / (2m)^2``, with self weights counted twice in the
degrees.
"""

from __future__ import annotations

import heapq
from bisect import insort
import logging
import math
import warnings
from collections import deque
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .types import InducedGraph, SummaryGraph, parse_tearing

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EdgeModularityTable:
    """One row per induced edge ``u < v``, sorted by ``(u, v)``."""

    u: np.ndarray
    v: np.ndarray
    weight: np.ndarray
    dq: np.ndarray

    def __len__(self) -> int:
        return len(self.u)

    def heap_order(self) -> np.ndarray:
        """Row indices by descending ``dq``; ties by ``(u, v)``."""
        return np.lexsort((self.v, self.u, -self.dq))

    def lookup(self) -> dict:
        return {(int(a), int(b)): i for i, (a, b) in enumerate(zip(self.u, self.v))}


def edge_modularity(ig: InducedGraph) -> EdgeModularityTable:
    u, v, w = ig.edge_list()
    m = ig.total_weight()
    if m <= 0 or len(u) == 0:
        raise ValueError("induced graph has no weighted edges to tear")
    deg = ig.degrees()
    two_m = 2.0 * m
    dq = w / two_m - deg[u] * deg[v] / (two_m * two_m)
    return EdgeModularityTable(u, v, w, dq)


class UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.components = n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.components -= 1
        return True


def component_count(n: int, u, v) -> int:
    if n == 0:
        return 0
    adj = sp.coo_matrix((np.ones(len(u)), (np.asarray(u), np.asarray(v))), shape=(n, n))
    return int(connected_components(adj, directed=False)[0])


def spanning_phase(ig: InducedGraph, table: EdgeModularityTable):
    """Return ``(kept, discarded)`` row indices into ``table``.

    Edges are popped by descending modularity and kept only when they merge
    two components; popping stops once the component count equals that of
    ``ig``. Everything not kept is discarded.
    """
    n = ig.node_count
    target = component_count(n, table.u, table.v)
    uf = UnionFind(n)
    kept = []
    for idx in table.heap_order():
        if uf.components == target:
            break
        if uf.union(int(table.u[idx]), int(table.v[idx])):
            kept.append(int(idx))
    kept = np.asarray(sorted(kept), dtype=np.int64)
    mask = np.ones(len(table), dtype=bool)
    mask[kept] = False
    return kept, np.flatnonzero(mask)


def _hop_path(adj: list, src: int, dst: int):
    """Fewest-hop path as a node list; neighbours expanded in ascending id order."""
    parent = {src: -1}
    queue = deque([src])
    while queue:
        x = queue.popleft()
        if x == dst:
            break
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                queue.append(y)
    if dst not in parent:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def _weighted_path(adj: list, weights: dict, src: int, dst: int):
    """Shortest path with edge length ``1 / weight``."""
    dist = {src: 0.0}
    parent = {src: -1}
    heap = [(0.0, src)]
    done = set()
    while heap:
        d, x = heapq.heappop(heap)
        if x in done:
            continue
        done.add(x)
        if x == dst:
            break
        for y in adj[x]:
            nd = d + 1.0 / weights[(min(x, y), max(x, y))]
            if nd < dist.get(y, math.inf):
                dist[y] = nd
                parent[y] = x
                heapq.heappush(heap, (nd, y))
    if dst not in parent:
        return None
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def reintroduce_loops(
    ig: InducedGraph,
    table: EdgeModularityTable,
    kept,
    discarded,
    c: float,
    loop_path: str = "hops",
    point_nodes=None,
) -> SummaryGraph:
    """Restore discarded edges whose loop has modularity sum ``>= c``.

    Discarded edges are visited by descending modularity; a restored edge is
    immediately available to later loops.
    """
    n = ig.node_count
    adj = [[] for _ in range(n)]
    for idx in kept:
        a, b = int(table.u[idx]), int(table.v[idx])
        adj[a].append(b)
        adj[b].append(a)
    for nb in adj:
        nb.sort()
    lookup = table.lookup()
    weights = {key: float(table.weight[i]) for key, i in lookup.items()}
    dq = table.dq
    discarded = np.asarray(discarded, dtype=np.int64)
    order = discarded[np.lexsort((table.v[discarded], table.u[discarded], -dq[discarded]))]

    restored = []
    if c != math.inf:
        for idx in order:
            a, b = int(table.u[idx]), int(table.v[idx])
            if c == -math.inf:
                path = None
                total = -math.inf
            else:
                if loop_path == "weighted":
                    path = _weighted_path(adj, weights, a, b)
                else:
                    path = _hop_path(adj, a, b)
                if path is None:
                    raise AssertionError(f"endpoints {a}, {b} lie in different components")
                total = float(dq[idx]) + sum(
                    float(dq[lookup[(min(x, y), max(x, y))]]) for x, y in zip(path, path[1:])
                )
            if c == -math.inf or total >= c:
                restored.append(int(idx))
                insort(adj[a], b)
                insort(adj[b], a)

    rows = np.concatenate([np.asarray(kept, np.int64), np.asarray(restored, np.int64)])
    phase = ["spanning"] * len(kept) + ["reintroduced"] * len(restored)
    order = np.lexsort((table.v[rows], table.u[rows]))
    rows = rows[order]
    phase = [phase[i] for i in order]
    return SummaryGraph(
        n,
        ig.meta,
        table.u[rows],
        table.v[rows],
        table.weight[rows],
        dq[rows],
        phase,
        point_nodes,
    )


def threshold_from_modularity(q: float) -> float:
    """``2 ln Q``; non-positive Q falls back to keeping every loop."""
    if not q > 0:
        warnings.warn(f"modularity {q} <= 0; tearing threshold falls back to 'all'", stacklevel=2)
        return -math.inf
    return 2.0 * math.log(q)


def default_threshold(g_l, part) -> float:
    from .community import modularity

    return threshold_from_modularity(modularity(g_l, part))


def resolve_threshold(mode: str, q: float | None = None) -> float:
    """Map a tearing mode string to the numeric threshold ``c``."""
    kind, value = parse_tearing(mode)
    if kind == "all":
        return -math.inf
    if kind == "none":
        return math.inf
    if kind == "fixed":
        return float(value)
    if q is None:
        raise ValueError("mode 'paper' needs the partition modularity")
    return threshold_from_modularity(q)


def tear(ig: InducedGraph, c: float, loop_path: str = "hops", point_nodes=None):
    """Both phases; returns ``(summary, stats)``. Edgeless inputs pass through."""
    if ig.weights.nnz == 0:
        empty = np.empty(0)
        g = SummaryGraph(ig.node_count, ig.meta, empty, empty, empty, empty, (), point_nodes)
        return g, {"edges_induced": 0, "edges_spanning": 0, "edges_reinstated": 0}
    table = edge_modularity(ig)
    kept, discarded = spanning_phase(ig, table)
    g = reintroduce_loops(ig, table, kept, discarded, c, loop_path, point_nodes)
    stats = {
        "edges_induced": len(table),
        "edges_spanning": len(kept),
        "edges_reinstated": g.phase.count("reintroduced"),
    }
    return g, stats
