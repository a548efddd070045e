"""Segment quality for summary graphs."""

from __future__ import annotations

import logging
import warnings

import numpy as np

from .community import louvain
from .types import PointCloud, SummaryGraph

log = logging.getLogger(__name__)

# published averages on GoogleNews word vectors; documentation only
REFERENCE_COSINE = {"shapevis": 0.224, "mapper_umap": 0.186, "mapper_largevis": 0.132}


def pseudo_label(g: SummaryGraph, seed: int = 0) -> np.ndarray:
    """Segment id per summary node from level-0 Louvain on the summary edges."""
    if g.node_count == 0:
        raise ValueError("empty summary graph")
    if g.edge_count == 0:
        return np.arange(g.node_count)
    return louvain(g.weights_csr(), seed)[0].assignment


def point_segments(g: SummaryGraph, seed: int = 0) -> np.ndarray:
    """Segment id per raw point via the graph's point -> node map."""
    if g.point_nodes is None:
        raise ValueError("summary graph carries no point -> node assignment")
    return pseudo_label(g, seed)[g.point_nodes]


def avg_intra_segment_cosine(pc: PointCloud | np.ndarray, segments) -> float:
    """Mean cosine similarity over all unordered same-segment pairs.

    Uses ``sum_{i<j} u_i . u_j = (|sum u|^2 - n) / 2`` for unit vectors, so
    the result is exact in O(N d). Zero vectors are dropped with a warning.
    Returns NaN when no segment has two points.
    """
    x = pc.data if isinstance(pc, PointCloud) else np.asarray(pc, dtype=np.float64)
    seg = np.asarray(segments, dtype=np.int64)
    if len(seg) != len(x):
        raise ValueError("every point needs a segment")
    norms = np.linalg.norm(x, axis=1)
    nz = norms > 0
    if not nz.all():
        warnings.warn(f"{(~nz).sum()} zero vectors excluded", stacklevel=2)
    u = x[nz] / norms[nz, None]
    seg = seg[nz]
    _, seg = np.unique(seg, return_inverse=True)
    n_seg = int(seg.max()) + 1 if len(seg) else 0
    sums = np.zeros((n_seg, x.shape[1]))
    np.add.at(sums, seg, u)
    sizes = np.bincount(seg, minlength=n_seg).astype(np.float64)
    pair_sum = (np.einsum("ij,ij->i", sums, sums) - sizes) / 2.0
    pairs = sizes * (sizes - 1) / 2.0
    if pairs.sum() == 0:
        return float("nan")
    return float(np.clip(pair_sum.sum() / pairs.sum(), -1.0, 1.0))


def segment_report(pc: PointCloud, g: SummaryGraph, seed: int = 0) -> dict:
    seg = point_segments(g, seed)
    return {
        "segments": int(seg.max()) + 1 if len(seg) else 0,
        "avg_intra_segment_cosine": avg_intra_segment_cosine(pc, seg),
        "nodes": g.node_count,
        "edges": g.edge_count,
    }
