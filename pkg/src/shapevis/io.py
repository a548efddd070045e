"""Point-cloud readers/writers and summary-graph export.

Binary point files::

    b"SVPC" | u32 version=1 | u64 N | u32 d | N*d float32 (row-major)
    | u8 has_labels | [N int32 labels]

All integers little-endian.
"""

from __future__ import annotations

import csv
import json
import struct
import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .types import PointCloud, SummaryGraph

MAGIC = b"SVPC"
VERSION = 1
_HEADER = struct.Struct("<4sIQI")


class FormatError(ValueError):
    """Malformed input file."""


# ---------------------------------------------------------------------------
# CSV


def read_csv(path, has_header: bool = False, label_column: int | None = None) -> PointCloud:
    rows = []
    labels = []
    width = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, row in enumerate(reader, start=1):
            if has_header and lineno == 1:
                continue
            if not row or all(not c.strip() for c in row):
                continue
            if width is None:
                width = len(row)
                if label_column is not None and not -width <= label_column < width:
                    raise FormatError(f"line {lineno}: label column {label_column} out of range")
            elif len(row) != width:
                raise FormatError(f"line {lineno}: expected {width} fields, got {len(row)}")
            try:
                values = [float(c) for c in row]
            except ValueError as exc:
                raise FormatError(f"line {lineno}: non-numeric cell ({exc})") from None
            if label_column is not None:
                lab = values.pop(label_column % width)
                if lab != int(lab):
                    raise FormatError(f"line {lineno}: label {lab} is not an integer")
                labels.append(int(lab))
            rows.append(values)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    if not rows[0]:
        raise FormatError(f"{path}: no coordinate columns")
    return PointCloud(np.asarray(rows, dtype=np.float64), labels if label_column is not None else None)


def write_csv(pc: PointCloud, path, header: bool = False) -> None:
    """Coordinates as float32 text, labels (if any) as the last column."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header:
            cols = [f"x{i}" for i in range(pc.d)]
            w.writerow(cols + (["label"] if pc.labels is not None else []))
        data32 = pc.data.astype(np.float32)
        for i, row in enumerate(data32):
            out = [repr(float(x)) for x in row]
            if pc.labels is not None:
                out.append(str(int(pc.labels[i])))
            w.writerow(out)


# ---------------------------------------------------------------------------
# binary


def write_binary(pc: PointCloud, path) -> None:
    n, d = pc.data.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, d))
        fh.write(pc.data.astype("<f4").tobytes(order="C"))
        if pc.labels is None:
            fh.write(b"\x00")
        else:
            fh.write(b"\x01")
            fh.write(pc.labels.astype("<i4").tobytes())


def read_binary(path) -> PointCloud:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError(f"truncated header: expected {_HEADER.size} bytes, got {len(raw)}")
    magic, version, n, d = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    off = _HEADER.size
    need = n * d * 4
    if len(raw) - off < need:
        raise FormatError(
            f"truncated float block: expected {need} bytes, got {len(raw) - off}"
        )
    data = np.frombuffer(raw, dtype="<f4", count=n * d, offset=off).reshape(n, d)
    off += need
    if off >= len(raw):
        raise FormatError("missing label marker byte")
    marker = raw[off]
    off += 1
    labels = None
    if marker == 1:
        if len(raw) - off < 4 * n:
            raise FormatError(f"truncated label block: expected {4 * n} bytes, got {len(raw) - off}")
        labels = np.frombuffer(raw, dtype="<i4", count=n, offset=off).astype(np.int64)
        off += 4 * n
    elif marker != 0:
        raise FormatError(f"bad label marker {marker}")
    if off != len(raw):
        raise FormatError(f"{len(raw) - off} trailing bytes after payload")
    return PointCloud(data.astype(np.float64), labels)


def read_points(path, fmt: str | None = None, has_header: bool = False,
                label_column: int | None = None) -> PointCloud:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    if fmt is None:
        fmt = "bin" if path.suffix in (".bin", ".svpc") else "csv"
    if fmt == "bin":
        return read_binary(path)
    if fmt == "csv":
        return read_csv(path, has_header, label_column)
    raise ValueError(f"unknown point format {fmt!r}")


def write_points(pc: PointCloud, path, fmt: str | None = None) -> None:
    if fmt is None:
        fmt = "bin" if Path(path).suffix in (".bin", ".svpc") else "csv"
    if fmt == "bin":
        write_binary(pc, path)
    elif fmt == "csv":
        write_csv(pc, path)
    else:
        raise ValueError(f"unknown point format {fmt!r}")


# ---------------------------------------------------------------------------
# summary graphs

_NODE_KEYS = [
    ("point_count", "int"),
    ("dominant_label", "int"),
    ("label_histogram", "string"),
]
_EDGE_KEYS = [("weight", "double"), ("modularity", "double"), ("phase", "string")]


def summary_to_json(g: SummaryGraph) -> str:
    return json.dumps(g.to_dict(), sort_keys=True, separators=(",", ":"))


def read_summary_json(path) -> SummaryGraph:
    with open(path) as fh:
        return SummaryGraph.from_dict(json.load(fh))


def _graphml(g: SummaryGraph) -> str:
    ns = "http://graphml.graphdrawing.org/xmlns"
    root = ET.Element("graphml", xmlns=ns)
    for name, typ in _NODE_KEYS:
        ET.SubElement(root, "key", {"id": name, "for": "node", "attr.name": name, "attr.type": typ})
    for name, typ in _EDGE_KEYS:
        ET.SubElement(root, "key", {"id": name, "for": "edge", "attr.name": name, "attr.type": typ})
    graph = ET.SubElement(root, "graph", id="G", edgedefault="undirected")
    for node in g.to_dict()["nodes"]:
        el = ET.SubElement(graph, "node", id=f"n{node['id']}")
        ET.SubElement(el, "data", key="point_count").text = str(node["point_count"])
        dom = node["dominant_label"]
        ET.SubElement(el, "data", key="dominant_label").text = str(-1 if dom is None else dom)
        ET.SubElement(el, "data", key="label_histogram").text = json.dumps(
            node["label_histogram"], sort_keys=True
        )
    for i, (u, v) in enumerate(zip(g.src.tolist(), g.dst.tolist())):
        el = ET.SubElement(graph, "edge", id=f"e{i}", source=f"n{u}", target=f"n{v}")
        ET.SubElement(el, "data", key="weight").text = repr(float(g.weight[i]))
        ET.SubElement(el, "data", key="modularity").text = repr(float(g.modularity[i]))
        ET.SubElement(el, "data", key="phase").text = g.phase[i]
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _dot(g: SummaryGraph) -> str:
    lines = ["graph shapevis {"]
    for node in g.to_dict()["nodes"]:
        dom = node["dominant_label"]
        hist = json.dumps(node["label_histogram"], sort_keys=True).replace('"', '\\"')
        lines.append(
            f'  n{node["id"]} [point_count={node["point_count"]}, '
            f'dominant_label={-1 if dom is None else dom}, label_histogram="{hist}"];'
        )
    for i, (u, v) in enumerate(zip(g.src.tolist(), g.dst.tolist())):
        lines.append(
            f"  n{u} -- n{v} [weight={float(g.weight[i])!r}, "
            f'modularity={float(g.modularity[i])!r}, phase="{g.phase[i]}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def write_summary(g: SummaryGraph, fmt: str, path) -> None:
    if fmt == "json":
        text = summary_to_json(g)
    elif fmt == "graphml":
        text = _graphml(g)
    elif fmt == "dot":
        text = _dot(g)
    else:
        raise ValueError(f"unknown summary format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)


def write_triplets(weights, path) -> None:
    """Upper-triangle ``i j w`` lines of a sparse symmetric matrix."""
    up = sp.triu(weights, k=1).tocoo()
    order = np.lexsort((up.col, up.row))
    with open(path, "w") as fh:
        for i, j, w in zip(up.row[order], up.col[order], up.data[order]):
            fh.write(f"{i} {j} {float(w)!r}\n")


def dump_json(obj, path) -> None:
    """Write any model type with ``to_dict`` as JSON."""
    with open(path, "w") as fh:
        json.dump(obj.to_dict(), fh)


def load_json(cls, path):
    with open(path) as fh:
        return cls.from_dict(json.load(fh))
