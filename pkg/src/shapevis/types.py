"""Shared data model for the pipeline stages.

Every container is a frozen dataclass over numpy arrays. Node ids are dense
integers per stage; the mapping arrays (``sample_map``, ``landmarks``,
``rev_neigh``, ``members``) carry provenance from one stage to the next.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from functools import cached_property
from typing import Any, Optional

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 10_000


def _as_int_array(x) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(x, dtype=np.int64))


def canonical_edges(pairs) -> np.ndarray:
    """Return unique ``(i, j)`` rows with ``i < j``, lexicographically sorted.

    Self-loops are dropped.
    """
    arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
    if arr.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    keep = lo != hi
    out = np.stack([lo[keep], hi[keep]], axis=1)
    if out.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    return np.ascontiguousarray(np.unique(out, axis=0))


def _csr_to_dict(m: sp.csr_matrix) -> dict:
    return {
        "shape": list(m.shape),
        "indptr": m.indptr.tolist(),
        "indices": m.indices.tolist(),
        "data": m.data.tolist(),
    }


def _csr_from_dict(d: dict) -> sp.csr_matrix:
    return sp.csr_matrix(
        (
            np.asarray(d["data"], dtype=np.float64),
            np.asarray(d["indices"], dtype=np.int32),
            np.asarray(d["indptr"], dtype=np.int32),
        ),
        shape=tuple(d["shape"]),
    )


def _csr_equal(a: sp.csr_matrix, b: sp.csr_matrix) -> bool:
    return (
        a.shape == b.shape
        and np.array_equal(a.indptr, b.indptr)
        and np.array_equal(a.indices, b.indices)
        and np.array_equal(a.data, b.data)
    )


def symmetric_csr(rows, cols, vals, n: int) -> sp.csr_matrix:
    """Build a symmetric CSR matrix from one triangle of entries.

    Entries are mirrored, duplicates summed, explicit zeros removed and
    column indices sorted.
    """
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.float64)
    off = rows != cols
    r = np.concatenate([rows, cols[off]])
    c = np.concatenate([cols, rows[off]])
    v = np.concatenate([vals, vals[off]])
    m = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    m.sum_duplicates()
    m.eliminate_zeros()
    m.sort_indices()
    return m


# ---------------------------------------------------------------------------
# Point cloud


@dataclass
class ValidationReport:
    ok: bool
    nonfinite_rows: list[int] = field(default_factory=list)
    label_mismatch: Optional[tuple[int, int]] = None
    messages: list[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class PointCloud:
    """N points in d dimensions with optional integer labels."""

    data: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        object.__setattr__(self, "data", np.ascontiguousarray(data))
        if self.labels is not None:
            object.__setattr__(self, "labels", _as_int_array(self.labels))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def validate(self) -> ValidationReport:
        return validate(self)

    def to_dict(self) -> dict:
        return {
            "data": self.data.tolist(),
            "labels": None if self.labels is None else self.labels.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PointCloud":
        data = np.asarray(d["data"], dtype=np.float64)
        return cls(data.reshape(len(d["data"]), -1), d.get("labels"))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointCloud):
            return NotImplemented
        if (self.labels is None) != (other.labels is None):
            return False
        same_labels = self.labels is None or np.array_equal(self.labels, other.labels)
        return same_labels and np.array_equal(self.data, other.data)


def validate(pc: PointCloud) -> ValidationReport:
    """Check the point-cloud invariants; never raises."""
    msgs = []
    data = pc.data
    if data.ndim != 2 or data.shape[0] < 1 or data.shape[1] < 1:
        msgs.append(f"expected a non-empty N x d matrix, got shape {data.shape}")
        return ValidationReport(False, messages=msgs)
    bad = np.flatnonzero(~np.isfinite(data).all(axis=1)).tolist()
    if bad:
        msgs.append(f"non-finite values in rows {bad[:20]}" + (" ..." if len(bad) > 20 else ""))
    mismatch = None
    if pc.labels is not None and len(pc.labels) != data.shape[0]:
        mismatch = (len(pc.labels), data.shape[0])
        msgs.append(f"label count {mismatch[0]} does not match N={mismatch[1]}")
    return ValidationReport(not msgs, bad, mismatch, msgs)


# ---------------------------------------------------------------------------
# Graphs


@dataclass(frozen=True, eq=False)
class NeighborGraph:
    """Undirected unweighted graph over the sampled points.

    ``edges`` holds each edge once as ``(i, j)`` with ``i < j``; use
    :meth:`from_pairs` to canonicalize arbitrary pairs.
    """

    node_count: int
    edges: np.ndarray
    sample_map: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "edges", canonical_edges(self.edges))
        object.__setattr__(self, "sample_map", _as_int_array(self.sample_map))
        if len(self.sample_map) != self.node_count:
            raise ValueError("sample_map length must equal node_count")
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= self.node_count):
            raise ValueError("edge endpoint out of range")

    @classmethod
    def from_pairs(cls, node_count: int, pairs, sample_map=None) -> "NeighborGraph":
        if sample_map is None:
            sample_map = np.arange(node_count)
        return cls(node_count, pairs, sample_map)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` adjacency with sorted neighbor lists."""
        n = self.node_count
        e = self.edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return indptr, np.ascontiguousarray(dst)

    def neighbors(self, i: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[i] : indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.csr[0])

    def has_edge(self, i: int, j: int) -> bool:
        if i == j:
            return False
        nb = self.neighbors(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(map(tuple, self.edges.tolist()))

    def to_dict(self) -> dict:
        return {
            "node_count": self.node_count,
            "edges": self.edges.tolist(),
            "sample_map": self.sample_map.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NeighborGraph":
        return cls(d["node_count"], d["edges"], d["sample_map"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, NeighborGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.sample_map, other.sample_map)
        )


@dataclass(frozen=True, eq=False)
class LandmarkCover:
    """Landmarks and the node -> landmark assignment.

    ``rev_neigh[v]`` is the *position* in ``landmarks`` of the landmark that
    covered node ``v``; ``owner`` gives the landmark's node id instead.
    """

    landmarks: np.ndarray
    rev_neigh: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "landmarks", _as_int_array(self.landmarks))
        object.__setattr__(self, "rev_neigh", _as_int_array(self.rev_neigh))

    @property
    def size(self) -> int:
        return len(self.landmarks)

    @property
    def owner(self) -> np.ndarray:
        return self.landmarks[self.rev_neigh]

    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.rev_neigh, kind="stable")
        bounds = np.searchsorted(self.rev_neigh[order], np.arange(self.size + 1))
        return [order[bounds[i] : bounds[i + 1]] for i in range(self.size)]

    def check(self, node_count: int) -> list[str]:
        """Return violated invariants (empty when the cover is a partition)."""
        problems = []
        if len(self.rev_neigh) != node_count:
            problems.append("rev_neigh is not total")
        if len(np.unique(self.landmarks)) != len(self.landmarks):
            problems.append("duplicate landmarks")
        if len(self.rev_neigh) and (self.rev_neigh.min() < 0 or self.rev_neigh.max() >= self.size):
            problems.append("rev_neigh points outside the landmark list")
        elif self.size and (
            self.landmarks.max() >= len(self.rev_neigh)
            or not np.array_equal(self.rev_neigh[self.landmarks], np.arange(self.size))
        ):
            problems.append("a landmark is not assigned to itself")
        return problems

    def to_dict(self) -> dict:
        return {"landmarks": self.landmarks.tolist(), "rev_neigh": self.rev_neigh.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LandmarkCover":
        return cls(d["landmarks"], d["rev_neigh"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, LandmarkCover):
            return NotImplemented
        return np.array_equal(self.landmarks, other.landmarks) and np.array_equal(
            self.rev_neigh, other.rev_neigh
        )


@dataclass(frozen=True, eq=False)
class WeightedLandmarkGraph:
    """Symmetric sparse weights over landmarks, zero diagonal."""

    weights: sp.csr_matrix

    def __post_init__(self):
        w = sp.csr_matrix(self.weights, dtype=np.float64)
        w.sort_indices()
        object.__setattr__(self, "weights", w)

    @property
    def node_count(self) -> int:
        return self.weights.shape[0]

    def weight(self, i: int, j: int) -> float:
        return float(self.weights[i, j])

    def total_weight(self) -> float:
        """Sum over undirected edges (each counted once)."""
        return float(self.weights.sum()) / 2.0

    def to_dict(self) -> dict:
        return {"weights": _csr_to_dict(self.weights)}

    @classmethod
    def from_dict(cls, d: dict) -> "WeightedLandmarkGraph":
        return cls(_csr_from_dict(d["weights"]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedLandmarkGraph):
            return NotImplemented
        return _csr_equal(self.weights, other.weights)


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: np.ndarray
    level: int = 0

    def __post_init__(self):
        object.__setattr__(self, "assignment", _as_int_array(self.assignment))

    @property
    def community_count(self) -> int:
        return int(self.assignment.max()) + 1 if len(self.assignment) else 0

    def is_contiguous(self) -> bool:
        return np.array_equal(np.unique(self.assignment), np.arange(self.community_count))

    def to_dict(self) -> dict:
        return {"assignment": self.assignment.tolist(), "level": self.level}

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(d["assignment"], d["level"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.level == other.level and np.array_equal(self.assignment, other.assignment)


def relabel_contiguous(assignment) -> np.ndarray:
    """Renumber ids 0..C-1 in order of first appearance."""
    a = np.asarray(assignment, dtype=np.int64)
    _, first, inv = np.unique(a, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.reshape(-1)]


@dataclass(frozen=True, eq=False)
class NodeMeta:
    """Per-node roll-up carried by induced and summary graphs."""

    members: list  # landmark positions per node
    point_count: np.ndarray
    label_hist: list  # dict label -> count per node

    def __post_init__(self):
        object.__setattr__(self, "members", [_as_int_array(m) for m in self.members])
        object.__setattr__(self, "point_count", _as_int_array(self.point_count))
        object.__setattr__(
            self, "label_hist", [{int(k): int(v) for k, v in h.items()} for h in self.label_hist]
        )

    def dominant_label(self, i: int) -> Optional[int]:
        """Most frequent label; ties go to the smallest label id."""
        h = self.label_hist[i]
        if not h:
            return None
        best = max(h.values())
        return min(k for k, v in h.items() if v == best)

    def to_dict(self) -> dict:
        return {
            "members": [m.tolist() for m in self.members],
            "point_count": self.point_count.tolist(),
            "label_hist": [{str(k): v for k, v in sorted(h.items())} for h in self.label_hist],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "NodeMeta":
        return cls(
            d["members"],
            d["point_count"],
            [{int(k): v for k, v in h.items()} for h in d["label_hist"]],
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, NodeMeta):
            return NotImplemented
        return (
            len(self.members) == len(other.members)
            and all(np.array_equal(a, b) for a, b in zip(self.members, other.members))
            and np.array_equal(self.point_count, other.point_count)
            and self.label_hist == other.label_hist
        )


@dataclass(frozen=True, eq=False)
class InducedGraph:
    """Quotient graph of a partition.

    ``weights`` holds the inter-community sums (symmetric, zero diagonal);
    ``self_weights`` the intra-community sums.
    """

    weights: sp.csr_matrix
    self_weights: np.ndarray
    meta: NodeMeta

    def __post_init__(self):
        w = sp.csr_matrix(self.weights, dtype=np.float64)
        w.sort_indices()
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "self_weights", np.asarray(self.self_weights, dtype=np.float64))

    @property
    def node_count(self) -> int:
        return self.weights.shape[0]

    def edge_list(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Upper-triangle edges ``(u, v, w)`` with ``u < v``, sorted."""
        up = sp.triu(self.weights, k=1).tocoo()
        order = np.lexsort((up.col, up.row))
        return (
            up.row[order].astype(np.int64),
            up.col[order].astype(np.int64),
            up.data[order].astype(np.float64),
        )

    def total_weight(self) -> float:
        return float(self.weights.sum()) / 2.0 + float(self.self_weights.sum())

    def degrees(self) -> np.ndarray:
        """Weighted degree with self weights counted twice."""
        return np.asarray(self.weights.sum(axis=1)).ravel() + 2.0 * self.self_weights

    def to_dict(self) -> dict:
        return {
            "weights": _csr_to_dict(self.weights),
            "self_weights": self.self_weights.tolist(),
            "meta": self.meta.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "InducedGraph":
        return cls(_csr_from_dict(d["weights"]), d["self_weights"], NodeMeta.from_dict(d["meta"]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, InducedGraph):
            return NotImplemented
        return (
            _csr_equal(self.weights, other.weights)
            and np.array_equal(self.self_weights, other.self_weights)
            and self.meta == other.meta
        )


PHASES = ("spanning", "reintroduced")


@dataclass(frozen=True, eq=False)
class SummaryGraph:
    """Final torn graph: induced-graph nodes with an annotated edge subset."""

    node_count: int
    meta: NodeMeta
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    modularity: np.ndarray
    phase: tuple
    point_nodes: Optional[np.ndarray] = None

    def __post_init__(self):
        src = _as_int_array(self.src)
        dst = _as_int_array(self.dst)
        lo, hi = np.minimum(src, dst), np.maximum(src, dst)
        object.__setattr__(self, "src", lo)
        object.__setattr__(self, "dst", hi)
        object.__setattr__(self, "weight", np.asarray(self.weight, dtype=np.float64))
        object.__setattr__(self, "modularity", np.asarray(self.modularity, dtype=np.float64))
        object.__setattr__(self, "phase", tuple(self.phase))
        if any(p not in PHASES for p in self.phase):
            raise ValueError(f"phase must be one of {PHASES}")
        if self.point_nodes is not None:
            object.__setattr__(self, "point_nodes", _as_int_array(self.point_nodes))

    @property
    def edge_count(self) -> int:
        return len(self.src)

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def dominant_label(self, i: int) -> Optional[int]:
        return self.meta.dominant_label(i)

    def weights_csr(self) -> sp.csr_matrix:
        return symmetric_csr(self.src, self.dst, self.weight, self.node_count)

    def to_dict(self) -> dict:
        nodes = []
        for i in range(self.node_count):
            nodes.append(
                {
                    "id": i,
                    "point_count": int(self.meta.point_count[i]),
                    "dominant_label": self.meta.dominant_label(i),
                    "label_histogram": {
                        str(k): v for k, v in sorted(self.meta.label_hist[i].items())
                    },
                    "landmarks": self.meta.members[i].tolist(),
                }
            )
        edges = [
            {
                "source": int(u),
                "target": int(v),
                "weight": float(w),
                "modularity": float(q),
                "phase": ph,
            }
            for u, v, w, q, ph in zip(self.src, self.dst, self.weight, self.modularity, self.phase)
        ]
        out: dict[str, Any] = {"directed": False, "nodes": nodes, "edges": edges}
        if self.point_nodes is not None:
            out["point_nodes"] = self.point_nodes.tolist()
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryGraph":
        nodes = sorted(d["nodes"], key=lambda n: n["id"])
        meta = NodeMeta(
            [n.get("landmarks", []) for n in nodes],
            [n["point_count"] for n in nodes],
            [{int(k): v for k, v in n["label_histogram"].items()} for n in nodes],
        )
        e = d["edges"]
        return cls(
            len(nodes),
            meta,
            [x["source"] for x in e],
            [x["target"] for x in e],
            [x["weight"] for x in e],
            [x["modularity"] for x in e],
            [x["phase"] for x in e],
            d.get("point_nodes"),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, SummaryGraph):
            return NotImplemented
        same_points = (self.point_nodes is None and other.point_nodes is None) or (
            self.point_nodes is not None
            and other.point_nodes is not None
            and np.array_equal(self.point_nodes, other.point_nodes)
        )
        return (
            self.node_count == other.node_count
            and self.meta == other.meta
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
            and np.array_equal(self.modularity, other.modularity)
            and self.phase == other.phase
            and same_points
        )


# ---------------------------------------------------------------------------
# Configuration

TEARING_MODES = ("paper", "all", "none", "fixed")


def parse_tearing(spec: str) -> tuple[str, Optional[float]]:
    """Parse ``paper | all | none | fixed:<value>``."""
    s = str(spec).strip().lower()
    if s in ("paper", "all", "none"):
        return s, None
    if s.startswith("fixed:"):
        return "fixed", float(s.split(":", 1)[1])
    raise ValueError(f"unknown tearing mode {spec!r}; expected paper|all|none|fixed:<v>")


@dataclass
class PipelineConfig:
    """Hyperparameters; defaults are the published settings where one exists."""

    m_cap: int = 1_000_000
    m_fraction: float = 1.0 / 3.0
    k: int = 10
    k_prime_hops: int = 1
    beta: int = 1000
    walk_len: int = 50
    th: float = 2.0
    level: int = 0
    tearing: str = "paper"
    seed: int = 0
    threads: int = 1
    knn_method: str = "auto"  # auto | exact | nndescent
    nn_iters: int = 10
    nn_sample_rate: float = 0.5
    keep_self_transitions: bool = False
    loop_path: str = "hops"  # hops | weighted
    exact_witness_limit: int = 1000

    def __post_init__(self):
        for name in ("m_cap", "k", "k_prime_hops", "beta", "walk_len", "threads", "nn_iters"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.m_fraction <= 1.0:
            raise ValueError("m_fraction must be in (0, 1]")
        if self.th < 0:
            raise ValueError("th must be >= 0")
        if self.level < 0:
            raise ValueError("level must be >= 0")
        if self.knn_method not in ("auto", "exact", "nndescent"):
            raise ValueError(f"unknown knn_method {self.knn_method!r}")
        if self.loop_path not in ("hops", "weighted"):
            raise ValueError(f"unknown loop_path {self.loop_path!r}")
        parse_tearing(self.tearing)

    @property
    def theta1(self) -> int:
        return max(1, self.walk_len // 2)

    @property
    def theta2(self) -> int:
        return self.walk_len

    def sample_size(self, n: int) -> int:
        return int(min(self.m_cap, math.ceil(n * self.m_fraction)))

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in d.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(value, type(getattr(cls(), key)))
        return cls(**kwargs)


def _coerce(value, typ):
    if isinstance(value, str):
        if typ is bool:
            return value.strip().lower() in ("1", "true", "yes", "on")
        if typ is int:
            return int(value)
        if typ is float:
            return float(value)
    return value
