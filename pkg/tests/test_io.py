import struct
import xml.etree.ElementTree as ET

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shapevis.io import (
    FormatError,
    read_binary,
    read_csv,
    read_points,
    read_summary_json,
    summary_to_json,
    write_binary,
    write_csv,
    write_summary,
    write_triplets,
)
from shapevis.types import NodeMeta, PointCloud, SummaryGraph, symmetric_csr


def _write(tmp_path, text, name="x.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_plain(tmp_path):
    pc = read_csv(_write(tmp_path, "0,0\n1,1\n"))
    assert pc.data.tolist() == [[0, 0], [1, 1]]
    assert pc.labels is None


def test_csv_header_and_label_column(tmp_path):
    pc = read_csv(_write(tmp_path, "x,y,c\n0,0,1\n"), has_header=True, label_column=2)
    assert pc.data.shape == (1, 2)
    assert pc.labels.tolist() == [1]


def test_csv_ragged_row_names_line(tmp_path):
    with pytest.raises(FormatError, match="line 2"):
        read_csv(_write(tmp_path, "0,0\n1\n"))


def test_csv_non_numeric_cell(tmp_path):
    with pytest.raises(FormatError, match="line 1"):
        read_csv(_write(tmp_path, "0,abc\n"))


def test_read_points_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="missing.csv"):
        read_points(tmp_path / "missing.csv")


def test_binary_round_trip_5x3(tmp_path):
    x = np.random.default_rng(1).standard_normal((5, 3)).astype(np.float32).astype(np.float64)
    pc = PointCloud(x, labels=[0, -1, 2, 3, 4])
    write_binary(pc, tmp_path / "a.bin")
    back = read_binary(tmp_path / "a.bin")
    assert back == pc


def test_binary_without_labels(tmp_path):
    pc = PointCloud(np.ones((2, 4)))
    write_binary(pc, tmp_path / "a.bin")
    assert read_binary(tmp_path / "a.bin").labels is None


def test_binary_bad_magic(tmp_path):
    p = tmp_path / "bad.bin"
    p.write_bytes(struct.pack("<4sIQI", b"XXXX", 1, 1, 1) + b"\0" * 5)
    with pytest.raises(FormatError, match="magic"):
        read_binary(p)


def test_binary_version_mismatch(tmp_path):
    p = tmp_path / "v.bin"
    p.write_bytes(struct.pack("<4sIQI", b"SVPC", 2, 1, 1) + b"\0" * 5)
    with pytest.raises(FormatError, match="version"):
        read_binary(p)


def test_binary_truncated_floats_report_sizes(tmp_path):
    pc = PointCloud(np.ones((5, 3)))
    write_binary(pc, tmp_path / "t.bin")
    raw = (tmp_path / "t.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(raw[: struct.calcsize("<4sIQI") + 40])
    with pytest.raises(FormatError, match="expected 60 bytes, got 40"):
        read_binary(tmp_path / "t.bin")


finite32 = st.floats(-1e6, 1e6, allow_nan=False, width=32)


@settings(max_examples=30, deadline=None)
@given(arrays(np.float32, st.tuples(st.integers(1, 8), st.integers(1, 4)), elements=finite32))
def test_binary_round_trip_exact(tmp_path_factory, x):
    p = tmp_path_factory.mktemp("bin") / "p.bin"
    pc = PointCloud(x.astype(np.float64))
    write_binary(pc, p)
    assert read_binary(p) == pc


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 4)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_csv_export_reproduces_float32(tmp_path_factory, x):
    p = tmp_path_factory.mktemp("csv") / "p.csv"
    write_csv(PointCloud(x), p)
    back = read_csv(p)
    assert np.array_equal(back.data.astype(np.float32), x.astype(np.float32))


def test_csv_export_with_labels_and_header(tmp_path):
    pc = PointCloud(np.array([[0.5, 1.5], [2.0, 3.0]]), labels=[4, 5])
    write_csv(pc, tmp_path / "l.csv", header=True)
    back = read_csv(tmp_path / "l.csv", has_header=True, label_column=2)
    assert back == pc


def _two_node_graph():
    meta = NodeMeta([[0], [1, 2]], [10, 4], [{0: 7, 1: 3}, {1: 4}])
    return SummaryGraph(2, meta, [0], [1], [0.75], [0.125], ["spanning"], [0, 0, 1])


def test_graphml_structure_and_external_parse(tmp_path):
    g = _two_node_graph()
    write_summary(g, "graphml", tmp_path / "g.graphml")
    root = ET.parse(tmp_path / "g.graphml").getroot()
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    assert len(root.findall(".//g:node", ns)) == 2
    assert len(root.findall(".//g:edge", ns)) == 1
    keys = {k.get("attr.name") for k in root.findall("g:key", ns)}
    assert {"weight", "modularity", "phase", "point_count", "dominant_label"} <= keys

    nxg = nx.read_graphml(tmp_path / "g.graphml")
    assert nxg.number_of_nodes() == 2 and nxg.number_of_edges() == 1
    assert nxg.nodes["n0"]["point_count"] == 10
    assert nxg.nodes["n0"]["dominant_label"] == 0
    data = nxg.edges["n0", "n1"]
    assert data["weight"] == 0.75 and data["modularity"] == 0.125 and data["phase"] == "spanning"


def test_dot_is_undirected(tmp_path):
    write_summary(_two_node_graph(), "dot", tmp_path / "g.dot")
    text = (tmp_path / "g.dot").read_text()
    assert text.startswith("graph ")
    assert "n0 -- n1" in text
    assert "->" not in text


def test_json_round_trip(tmp_path):
    g = _two_node_graph()
    write_summary(g, "json", tmp_path / "g.json")
    back = read_summary_json(tmp_path / "g.json")
    assert back == g
    assert summary_to_json(back) == summary_to_json(g)


def test_unwritable_path(tmp_path):
    with pytest.raises(OSError):
        write_summary(_two_node_graph(), "json", tmp_path / "no" / "such" / "dir.json")


def test_triplet_dump(tmp_path):
    w = symmetric_csr([0, 1], [2, 2], [0.5, 0.25], 3)
    write_triplets(w, tmp_path / "w.txt")
    assert (tmp_path / "w.txt").read_text().splitlines() == ["0 2 0.5", "1 2 0.25"]
