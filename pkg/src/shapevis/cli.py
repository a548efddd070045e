"""Command line entry point: ``shapevis run|gen|metrics|bench``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench as bench_mod
from .io import FormatError, read_points, write_points, write_summary, write_triplets
from .io import read_summary_json
from .metrics import segment_report
from .pipeline import StageError, run_pipeline
from .synth import gen_annulus, gen_blobs, gen_sphere
from .types import PipelineConfig, parse_tearing

log = logging.getLogger("shapevis")

# flag dest -> PipelineConfig field
_CFG_FLAGS = {
    "k": "k",
    "beta": "beta",
    "walk_len": "walk_len",
    "th": "th",
    "m_cap": "m_cap",
    "m_frac": "m_fraction",
    "hops": "k_prime_hops",
    "level": "level",
    "tearing": "tearing",
    "seed": "seed",
    "threads": "threads",
    "knn": "knn_method",
}


def read_config_file(path) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _tearing_arg(value: str) -> str:
    try:
        parse_tearing(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shapevis", description=__doc__)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="build a summary graph from a point file")
    run.add_argument("--input", required=True)
    run.add_argument("--format", choices=["csv", "bin"])
    run.add_argument("--header", action="store_true", help="CSV has a header row")
    run.add_argument("--label-col", type=int)
    run.add_argument("--config", help="key=value file; flags override it")
    run.add_argument("--k", type=int)
    run.add_argument("--beta", type=int)
    run.add_argument("--walk-len", type=int)
    run.add_argument("--th", type=float)
    run.add_argument("--m-cap", type=int)
    run.add_argument("--m-frac", type=float)
    run.add_argument("--hops", type=int)
    run.add_argument("--level", type=int)
    run.add_argument("--tearing", type=_tearing_arg)
    run.add_argument("--seed", type=int)
    run.add_argument("--threads", type=int)
    run.add_argument("--knn", choices=["auto", "exact", "nndescent"])
    run.add_argument("--out")
    run.add_argument("--out-format", choices=["json", "graphml", "dot"])
    run.add_argument("--report", help="write the run report JSON here")
    run.add_argument("--dump-weights", help="write landmark weights as 'i j w' lines")

    gen = sub.add_parser("gen", help="write a synthetic point cloud")
    gen.add_argument("kind", choices=["sphere", "blobs", "annulus"])
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, default=25)
    gen.add_argument("--centers", type=int, default=2)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--separation", type=float, default=20.0)
    gen.add_argument("--noise", type=float, default=0.05)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=["csv", "bin"])

    met = sub.add_parser("metrics", help="segment quality of a summary graph")
    met.add_argument("--graph", required=True, help="summary graph JSON")
    met.add_argument("--points", required=True)
    met.add_argument("--format", choices=["csv", "bin"])
    met.add_argument("--header", action="store_true")
    met.add_argument("--label-col", type=int)
    met.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="wall-time scaling on uniform spheres")
    b.add_argument("--sizes", default="10000,20000,40000,80000")
    b.add_argument("--d", type=int, default=25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("--out", help="CSV output path (stdout otherwise)")
    return p


def make_config(args) -> PipelineConfig:
    values = read_config_file(args.config) if args.config else {}
    for flag, name in _CFG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return PipelineConfig.from_dict(values)


def _out_format(args) -> str:
    if args.out_format:
        return args.out_format
    suffix = Path(args.out).suffix.lower().lstrip(".")
    return suffix if suffix in ("json", "graphml", "dot") else "json"


def cmd_run(args) -> int:
    cfg = make_config(args)
    pc = read_points(args.input, args.format, args.header, args.label_col)
    result = run_pipeline(pc, cfg)
    if args.out:
        write_summary(result.summary, _out_format(args), args.out)
    if args.report:
        Path(args.report).write_text(result.report.to_json() + "\n")
    if args.dump_weights:
        write_triplets(result.landmark_graph.weights, args.dump_weights)
    if not args.out and not args.report:
        print(result.report.to_json())
    return 0


def cmd_gen(args) -> int:
    if args.kind == "sphere":
        pc = gen_sphere(args.n, args.d, args.seed)
    elif args.kind == "blobs":
        pc = gen_blobs(args.n, args.d, args.centers, args.sigma, args.separation, args.seed)
    else:
        pc = gen_annulus(args.n, args.noise, args.seed)
    write_points(pc, args.out, args.format)
    return 0


def cmd_metrics(args) -> int:
    g = read_summary_json(args.graph)
    pc = read_points(args.points, args.format, args.header, args.label_col)
    if g.point_nodes is not None and len(g.point_nodes) != pc.n:
        raise ValueError(f"graph covers {len(g.point_nodes)} points, file has {pc.n}")
    print(json.dumps(segment_report(pc, g, args.seed), indent=2, sort_keys=True))
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    res = bench_mod.scaling_run(sizes, args.d, PipelineConfig(seed=args.seed, threads=args.threads), args.seed)
    text = bench_mod.to_csv(res["rows"])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"# loglog_slope={bench_mod.format_slope(res['slope'])}")
    for f in res["failed"]:
        print(f"# failed n={f['n']}: {f['error']}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    handlers = {"run": cmd_run, "gen": cmd_gen, "metrics": cmd_metrics, "bench": cmd_bench}
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, FormatError, StageError, ValueError, OSError) as exc:
        print(f"shapevis: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
