"""End-to-end summary-graph construction."""

from __future__ import annotations

import json
import logging
import math
import time
import warnings
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field

import numpy as np

from .community import Dendrogram, induce, louvain, modularity
from .knn import build_knn, knn_to_graph, set_threads
from .landmarks import sample_points, select_landmarks, witness_augment, witness_neighbors
from .tearing import resolve_threshold, tear
from .types import (
    InducedGraph,
    LandmarkCover,
    NeighborGraph,
    Partition,
    PipelineConfig,
    PointCloud,
    SummaryGraph,
    WeightedLandmarkGraph,
    validate,
)
from .weighting import WalkCountMatrix, run_walks, symmetrize, transition_matrix

log = logging.getLogger(__name__)

MIN_POINTS = 4


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class RunReport:
    n: int = 0
    m_sampled: int = 0
    landmarks: int = 0
    communities: int = 0
    edges_induced: int = 0
    edges_spanning: int = 0
    edges_reinstated: int = 0
    modularity_q: float = 0.0
    threshold_c: float = 0.0
    seed: int = 0
    stage_times_ms: dict = field(default_factory=dict)
    total_ms: float = 0.0
    graph_edges: int = 0
    walks: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        c = d["threshold_c"]
        if not math.isfinite(c):
            d["threshold_c"] = "inf" if c > 0 else "-inf"
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


@dataclass
class PipelineResult:
    summary: SummaryGraph
    report: RunReport
    neighbor_graph: NeighborGraph
    cover: LandmarkCover
    walk_counts: WalkCountMatrix
    landmark_graph: WeightedLandmarkGraph
    dendrogram: Dendrogram
    partition: Partition
    induced: InducedGraph
    point_landmark: np.ndarray

    def __iter__(self):
        yield self.summary
        yield self.report


def stage_seeds(seed: int) -> dict:
    """Independent per-stage seeds derived from the run seed."""
    names = ("sample", "knn", "witness", "landmarks", "walks", "louvain")
    state = np.random.SeedSequence(seed).generate_state(len(names), dtype=np.uint32)
    return {name: int(s) for name, s in zip(names, state)}


def run_pipeline(pc: PointCloud, cfg: PipelineConfig | None = None) -> PipelineResult:
    """Sample, build and augment the neighbour graph, cover it with landmarks,
    weight landmark pairs by random walks, detect communities and tear the
    induced graph.
    """
    cfg = cfg or PipelineConfig()
    report = RunReport(seed=cfg.seed)
    times = report.stage_times_ms
    t_start = time.perf_counter()

    @contextmanager
    def stage(name):
        t0 = time.perf_counter()
        try:
            yield
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        finally:
            times[name] = (time.perf_counter() - t0) * 1000.0

    with stage("validate"):
        rep = validate(pc)
        if not rep.ok:
            raise ValueError("; ".join(rep.messages))
        if pc.n < MIN_POINTS:
            raise ValueError(f"input too small: need at least {MIN_POINTS} points, got {pc.n}")
    set_threads(cfg.threads)
    seeds = stage_seeds(cfg.seed)
    report.n = pc.n

    with stage("sample"):
        sample, complement = sample_points(pc, cfg, seeds["sample"])
    report.m_sampled = len(sample)

    with stage("knn"):
        knn = build_knn(
            pc.data[sample], cfg.k, cfg.knn_method, cfg.nn_iters, cfg.nn_sample_rate, seeds["knn"]
        )
        g = knn_to_graph(knn, sample)

    with stage("witness"):
        nearest = None
        if len(complement) and g.node_count >= 2:
            nearest = witness_neighbors(
                g, pc, complement, exact_limit=cfg.exact_witness_limit, seed=seeds["witness"]
            )
            g = witness_augment(g, pc, complement, nearest=nearest)
    report.graph_edges = g.edge_count

    with stage("landmarks"):
        cover = select_landmarks(g, cfg.k_prime_hops, seeds["landmarks"])
    report.landmarks = cover.size

    with stage("walks"):
        counts = run_walks(g, cover, cfg, seeds["walks"])
        a = transition_matrix(counts, cfg.th)
        g_l = symmetrize(a)
    report.walks = cover.size * cfg.beta

    with stage("louvain"):
        dendro = louvain(g_l, seeds["louvain"])
        if cfg.level >= len(dendro):
            warnings.warn(
                f"partition level {cfg.level} unavailable; using level {len(dendro) - 1}",
                stacklevel=2,
            )
        part = dendro.partition(cfg.level)
        point_landmark = np.empty(pc.n, dtype=np.int64)
        point_landmark[sample] = cover.rev_neigh
        if len(complement):
            if nearest is not None:
                point_landmark[complement] = cover.rev_neigh[nearest.indices[:, 0]]
            else:
                point_landmark[complement] = cover.rev_neigh[0]
        induced = induce(g_l, part, point_landmark, pc.labels)
        q = modularity(g_l, part) if g_l.weights.nnz else 0.0
    report.communities = induced.node_count
    report.modularity_q = q

    with stage("tearing"):
        c = resolve_threshold(cfg.tearing, q)
        point_nodes = part.assignment[point_landmark]
        summary, stats = tear(induced, c, cfg.loop_path, point_nodes)
    report.threshold_c = c
    report.edges_induced = stats["edges_induced"]
    report.edges_spanning = stats["edges_spanning"]
    report.edges_reinstated = stats["edges_reinstated"]
    report.total_ms = (time.perf_counter() - t_start) * 1000.0
    log.info(
        "n=%d sampled=%d landmarks=%d communities=%d edges=%d Q=%.4f",
        pc.n, len(sample), cover.size, induced.node_count, summary.edge_count, q,
    )
    return PipelineResult(
        summary, report, g, cover, counts, g_l, dendro, part, induced, point_landmark
    )
