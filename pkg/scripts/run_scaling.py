#!/usr/bin/env python3
"""Time the full pipeline on uniform 25-d sphere samples and fit a log-log slope.

    python3 scripts/run_scaling.py --sizes 10000,20000,40000,80000 --out scaling.csv
"""

import argparse
import logging

from shapevis.bench import format_slope, scaling_run, to_csv
from shapevis.types import PipelineConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", default="10000,20000,40000,80000")
    p.add_argument("--d", type=int, default=25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out")
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    logging.getLogger("numba").setLevel(logging.WARNING)

    sizes = [int(s) for s in args.sizes.split(",")]
    res = scaling_run(sizes, args.d, PipelineConfig(seed=args.seed, threads=args.threads), args.seed)
    text = to_csv(res["rows"])
    print(text, end="")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"log-log slope: {format_slope(res['slope'])}")


if __name__ == "__main__":
    main()
