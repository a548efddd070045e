import json
import math

import numpy as np
import pytest

from shapevis.io import summary_to_json
from shapevis.pipeline import StageError, run_pipeline, stage_seeds
from shapevis.synth import gen_annulus, gen_blobs
from shapevis.types import PipelineConfig, PointCloud


@pytest.fixture(scope="module")
def blobs():
    return gen_blobs(600, 10, centers=2, seed=1)


@pytest.fixture(scope="module")
def blob_result(blobs):
    return run_pipeline(blobs, PipelineConfig(beta=300, seed=2))


def test_report_fields(blob_result, blobs):
    rep = blob_result.report
    assert rep.n == 600 and rep.m_sampled == 200
    assert rep.landmarks == blob_result.cover.size
    assert rep.communities == blob_result.summary.node_count
    assert set(rep.stage_times_ms) >= {"sample", "knn", "witness", "landmarks", "walks", "louvain", "tearing"}
    assert rep.edges_spanning + rep.edges_reinstated == blob_result.summary.edge_count
    json.loads(rep.to_json())


def test_every_point_assigned(blob_result):
    s = blob_result.summary
    assert len(s.point_nodes) == 600
    assert s.meta.point_count.sum() == 600
    assert sum(sum(h.values()) for h in s.meta.label_hist) == 600


def test_result_unpacks(blob_result):
    summary, report = blob_result
    assert summary is blob_result.summary and report is blob_result.report


def test_same_seed_same_json(blobs):
    cfg = PipelineConfig(beta=100, seed=7)
    assert summary_to_json(run_pipeline(blobs, cfg).summary) == summary_to_json(run_pipeline(blobs, cfg).summary)


def test_stage_seeds_independent():
    s = stage_seeds(0)
    assert len(set(s.values())) == len(s)
    assert s == stage_seeds(0) and s != stage_seeds(1)


def test_too_small_input():
    with pytest.raises(StageError, match="input too small"):
        run_pipeline(PointCloud(np.zeros((3, 2))))


def test_nonfinite_input_names_validate_stage():
    x = np.zeros((10, 2))
    x[4, 1] = np.nan
    with pytest.raises(StageError) as err:
        run_pipeline(PointCloud(x))
    assert err.value.stage == "validate"


def test_unavailable_level_warns(blobs):
    with pytest.warns(UserWarning, match="level"):
        run_pipeline(blobs, PipelineConfig(beta=50, level=50))


def test_tearing_modes_bracket_edge_counts():
    pc = gen_annulus(1500, seed=3)
    all_ = run_pipeline(pc, PipelineConfig(beta=300, tearing="all"))
    none = run_pipeline(pc, PipelineConfig(beta=300, tearing="none"))
    assert all_.report.threshold_c == -math.inf and none.report.threshold_c == math.inf
    assert all_.summary.edge_count == all_.report.edges_induced
    assert none.summary.edge_count == none.report.edges_spanning
    assert none.summary.edge_count <= all_.summary.edge_count


def test_exact_knn_method_runs(blobs):
    res = run_pipeline(blobs, PipelineConfig(beta=50, knn_method="exact"))
    assert res.summary.node_count >= 1
