"""Topology-preserving summary graphs for large point clouds."""

import warnings

# numba probes an old system TBB and falls back to another threading layer;
# the notice is harmless and would otherwise be printed on every run
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from .community import Dendrogram, induce, louvain, modularity
from .knn import KnnResult, exact_knn, knn_to_graph, nn_descent_knn
from .landmarks import sample_points, select_landmarks, witness_augment
from .pipeline import PipelineResult, RunReport, run_pipeline
from .tearing import default_threshold, edge_modularity, reintroduce_loops, spanning_phase
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

__version__ = "0.1.0"

__all__ = [
    "Dendrogram", "induce", "louvain", "modularity",
    "KnnResult", "exact_knn", "knn_to_graph", "nn_descent_knn",
    "sample_points", "select_landmarks", "witness_augment",
    "PipelineResult", "RunReport", "run_pipeline",
    "default_threshold", "edge_modularity", "reintroduce_loops", "spanning_phase",
    "InducedGraph", "LandmarkCover", "NeighborGraph", "Partition", "PipelineConfig",
    "PointCloud", "SummaryGraph", "WeightedLandmarkGraph", "validate",
    "WalkCountMatrix", "run_walks", "symmetrize", "transition_matrix",
]
