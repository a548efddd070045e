"""Wall-time scaling runs on uniform hypersphere samples."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
import math
import time

import numpy as np

from .pipeline import run_pipeline
from .synth import gen_sphere
from .types import PipelineConfig

log = logging.getLogger(__name__)

COLUMNS = ["n", "seconds", "knn_s", "walks_s", "louvain_s", "tearing_s", "landmarks", "communities"]


def loglog_slope(ns, seconds) -> float | None:
    """Least-squares slope of log(seconds) against log(n); None below two sizes."""
    ns = np.asarray(ns, dtype=float)
    secs = np.asarray(seconds, dtype=float)
    ok = (ns > 0) & (secs > 0)
    if ok.sum() < 2 or len(np.unique(ns[ok])) < 2:
        return None
    slope, _ = np.polyfit(np.log(ns[ok]), np.log(secs[ok]), 1)
    return float(slope)


def scaling_run(sizes, d: int = 25, cfg: PipelineConfig | None = None, seed: int = 0,
                warmup: bool = True) -> dict:
    """Run the pipeline on ``gen_sphere(n, d)`` for each size.

    Returns ``{"rows": [...], "slope": float | None, "failed": [...]}``. A
    tiny warm-up run first keeps JIT compilation out of the timings.
    """
    sizes = [int(s) for s in sizes]
    if sizes != sorted(sizes):
        raise ValueError("sizes must be ascending")
    cfg = cfg or PipelineConfig(seed=seed)
    if warmup:
        run_pipeline(gen_sphere(1500, d, seed), dataclasses.replace(cfg, beta=10))
    rows, failed = [], []
    for n in sizes:
        pc = gen_sphere(n, d, seed)
        t0 = time.perf_counter()
        try:
            result = run_pipeline(pc, cfg)
        except Exception as exc:  # recorded and skipped
            log.warning("n=%d failed: %s", n, exc)
            failed.append({"n": n, "error": str(exc)})
            continue
        secs = time.perf_counter() - t0
        st = result.report.stage_times_ms
        rows.append(
            {
                "n": n,
                "seconds": secs,
                "knn_s": (st.get("knn", 0) + st.get("witness", 0)) / 1000.0,
                "walks_s": st.get("walks", 0) / 1000.0,
                "louvain_s": st.get("louvain", 0) / 1000.0,
                "tearing_s": st.get("tearing", 0) / 1000.0,
                "landmarks": result.report.landmarks,
                "communities": result.report.communities,
                "graph_edges": result.report.graph_edges,
                "walks": result.report.walks,
            }
        )
        log.info("n=%d %.2fs", n, secs)
    slope = loglog_slope([r["n"] for r in rows], [r["seconds"] for r in rows])
    return {"rows": rows, "slope": slope, "failed": failed}


def to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{r[k]:.4f}" if isinstance(r[k], float) else r[k]) for k in COLUMNS})
    return buf.getvalue()


def format_slope(slope) -> str:
    return "null" if slope is None or not math.isfinite(slope) else f"{slope:.3f}"
