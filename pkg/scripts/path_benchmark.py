"""Relaxed / exact / discrete comparison on random maps; writes a CSV and prints summary statistics.

    python3 scripts/path_benchmark.py --maps 4 --scenarios 10 --out bench.csv
"""

import argparse
import json
import sys

from quietpath.cli import _bench_one, summarize, write_rows
from quietpath.mapio import generate_map, random_scenarios
from quietpath.planner import PlanConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--maps", type=int, default=4)
    ap.add_argument("--zones", type=int, default=15)
    ap.add_argument("--width", type=float, default=12000.0)
    ap.add_argument("--height", type=float, default=8000.0)
    ap.add_argument("--scenarios", type=int, default=10)
    ap.add_argument("--min-distance", type=float, default=4000.0)
    ap.add_argument("--time-limit", type=float, default=None)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    cfg = PlanConfig(time_limit=args.time_limit)
    methods = ["relaxed", "exact", "discrete"]
    all_rows, report = [], {}
    for k in range(args.maps):
        m = generate_map(args.zones, args.width, args.height, seed=k)
        scen = random_scenarios(m, args.scenarios, k, args.min_distance, args.width, args.height)
        rows = []
        for i, (s, g) in enumerate(scen):
            rows += _bench_one((k * args.scenarios + i, m, s, g, cfg, methods))
            print(f"map {k} scenario {i} done", file=sys.stderr, flush=True)
        report[f"map {k}"] = summarize(rows)
        all_rows += rows
    text = write_rows(all_rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(json.dumps(report, indent=1), file=sys.stderr)


if __name__ == "__main__":
    main()
