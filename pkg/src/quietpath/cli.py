"""Command line interface.

Exit codes: 0 success, 2 invalid input, 3 infeasible instance, 4 internal solver failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .discrete import DiscreteConfig
from .errors import InfeasibleError, QuietPathError, ValidationError
from .graph import DEFAULT_PATH_PARAMS, DEFAULT_TOUR_PARAMS, build_graph, scale_map
from .mapio import dump_map, generate_map, load_map, random_scenarios
from .model import build_rmicp, export_model
from .planner import PathPlanner, PlanConfig
from .solver.bnb import DEFAULT_BACKEND
from .svg import path_svg, tour_svg
from .tsp import TourPlanner, export_atsp, plan_tour_gtsp, plan_tour_minsoc

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4

BENCH_FIELDS = ["instance", "method", "cost", "bound", "gap", "graph_time", "opt_time", "status"]


@dataclass
class BenchmarkRow:
    instance: int
    method: str
    cost: float
    bound: float
    gap: float
    graph_time: float
    opt_time: float
    status: str


def _plan_config(args) -> PlanConfig:
    return PlanConfig(
        target_extent=args.target_extent, gap=args.gap, time_limit=args.time_limit, backend=args.backend,
        discrete=DiscreteConfig(soc_levels=args.soc_levels, spacing=args.spacing),
    )


def _emit(record: dict, out: str | None) -> None:
    text = json.dumps(record, indent=1, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_path(args) -> int:
    m = load_map(args.map)
    if m.goal is None:
        raise ValidationError("map has no goal")
    methods = [k for k in ("relaxed", "exact", "discrete") if getattr(args, k)] or [args.method]
    planner = PathPlanner(m, _plan_config(args))
    results = {}
    for meth in methods:
        res = planner.solve(meth)
        rec = res.record()
        if not args.timings:
            for key in ("graph_time", "opt_time"):
                rec.pop(key)
        results[meth] = (res, rec)
    record = {"gamma": planner.scaled.scale, "results": {k: v[1] for k, v in results.items()}}
    _emit(record, args.out)
    shown = next((results[k][0] for k in ("exact", "discrete") if k in results and results[k][0].plan), None)
    if args.svg:
        Path(args.svg).write_text(path_svg(m, None if shown is None else shown.plan))
    if all(not r.feasible for r, _ in results.values()):
        print("no feasible path for this instance", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_tour(args) -> int:
    m = load_map(args.map)
    if not m.targets:
        raise ValidationError("map has no targets")
    tp = TourPlanner(m, cfg=_plan_config(args))
    methods = ["minsoc", "gtsp"] if args.method == "both" else [args.method]
    plans = {}
    for meth in methods:
        if meth == "minsoc":
            plans[meth] = plan_tour_minsoc(m, planner=tp, seed=args.seed)
        else:
            plans[meth] = plan_tour_gtsp(m, d=args.d, planner=tp, seed=args.seed)
    record = {"gamma": tp.planner.scaled.scale, "tours": {k: p.as_dict() for k, p in plans.items()}}
    if len(plans) == 2:
        ca, cg = plans["minsoc"].cost, plans["gtsp"].cost
        record["percent_difference"] = 100.0 * (ca - cg) / cg if cg > 0 else 0.0
    if args.export_atsp:
        export_atsp(tp.minsoc_matrix(), args.export_atsp)
    _emit(record, args.out)
    if args.svg:
        plan = plans[methods[-1]]
        Path(args.svg).write_text(tour_svg(m, tp.points, plan.tour.order, plan.legs))
    return EXIT_OK


def cmd_generate(args) -> int:
    params = DEFAULT_TOUR_PARAMS if args.tour_params else DEFAULT_PATH_PARAMS
    m = generate_map(args.zones, args.width, args.height, args.seed, params=params, n_targets=args.targets,
                     min_distance=args.min_distance)
    text = dump_map(m)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _bench_one(job) -> list[BenchmarkRow]:
    inst, m, s, g, cfg, methods = job
    planner = PathPlanner(m.with_terminals(s, g), cfg)
    rows = []
    for meth in methods:
        res = planner.solve(meth)
        rows.append(BenchmarkRow(inst, meth, res.cost, res.bound if res.bound is not None else math.nan,
                                 res.gap if res.gap is not None else math.nan,
                                 res.graph_time, res.opt_time, res.status))
    return rows


def summarize(rows: list[BenchmarkRow]) -> dict:
    by = {}
    for r in rows:
        by.setdefault(r.instance, {})[r.method] = r
    rel_gap, dis_gap, t_ratio = [], [], []
    for d in by.values():
        ex = d.get("exact")
        if ex is None or not math.isfinite(ex.cost):
            continue
        if "relaxed" in d and ex.cost > 0:
            rel_gap.append((ex.cost - d["relaxed"].cost) / ex.cost)
        if "discrete" in d and math.isfinite(d["discrete"].cost) and d["discrete"].cost > 0:
            dis_gap.append((d["discrete"].cost - ex.cost) / d["discrete"].cost)
            t_ratio.append((d["discrete"].opt_time + d["discrete"].graph_time)
                           / max(ex.opt_time + ex.graph_time, 1e-9))

    def mean(v):
        return float(np.mean(v)) if v else None

    return {"instances": len(by), "mean_exact_vs_relaxed": mean(rel_gap),
            "mean_discrete_vs_exact": mean(dis_gap), "mean_time_ratio_discrete_over_exact": mean(t_ratio)}


def write_rows(rows: list[BenchmarkRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, BENCH_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        for k in ("cost", "bound", "gap", "graph_time", "opt_time"):
            d[k] = repr(float(d[k]))
        w.writerow(d)
    return buf.getvalue()


def read_rows(text: str) -> list[BenchmarkRow]:
    out = []
    for d in csv.DictReader(io.StringIO(text)):
        out.append(BenchmarkRow(int(d["instance"]), d["method"], float(d["cost"]), float(d["bound"]),
                                float(d["gap"]), float(d["graph_time"]), float(d["opt_time"]), d["status"]))
    return out


def cmd_benchmark(args) -> int:
    if args.map:
        m = load_map(args.map)
        width, height = None, None
    else:
        m = generate_map(args.zones, args.width, args.height, args.seed)
        width, height = args.width, args.height
    scen = random_scenarios(m, args.scenarios, args.seed, args.min_distance, width, height)
    methods = [s.strip() for s in args.methods.split(",") if s.strip()]
    cfg = _plan_config(args)
    jobs = [(k, m, s, g, cfg, methods) for k, (s, g) in enumerate(scen)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            chunks = list(ex.map(_bench_one, jobs))
    else:
        chunks = [_bench_one(j) for j in jobs]
    rows = sorted((r for c in chunks for r in c), key=lambda r: (r.instance, methods.index(r.method)))
    text = write_rows(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(json.dumps(summarize(rows), indent=1), file=sys.stderr)
    return EXIT_OK


def cmd_export_model(args) -> int:
    m = load_map(args.map)
    sm = scale_map(m, args.target_extent)
    graph = build_graph(sm)
    model, _ = build_rmicp(graph, sm.params, relaxed=args.relaxed)
    export_model(model, args.out)
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--gap", type=float, default=0.01, help="relative optimality gap for branch-and-bound")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per exact solve")
    p.add_argument("--target-extent", type=float, default=100.0, help="internal coordinate extent")
    p.add_argument("--soc-levels", type=int, default=10, help="discrete baseline SOC levels")
    p.add_argument("--spacing", type=float, default=100.0, help="discrete baseline sample spacing")
    p.add_argument("--backend", default=DEFAULT_BACKEND, choices=["clarabel", "scs", "native"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quietpath", description="Fuel-optimal hybrid UAV paths around quiet zones")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("path", help="plan a source-goal path")
    p.add_argument("--map", required=True)
    p.add_argument("--method", default="exact", choices=["relaxed", "exact", "discrete"])
    p.add_argument("--relaxed", action="store_true")
    p.add_argument("--exact", action="store_true")
    p.add_argument("--discrete", action="store_true")
    p.add_argument("--svg", default=None)
    p.add_argument("--timings", action="store_true", help="include wall-clock times in the record")
    _common(p)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("tour", help="plan a tour over the map's targets")
    p.add_argument("--map", required=True)
    p.add_argument("--method", default="minsoc", choices=["minsoc", "gtsp", "both"])
    p.add_argument("--d", type=int, default=3, help="SOC levels per target (gtsp)")
    p.add_argument("--svg", default=None)
    p.add_argument("--export-atsp", default=None, help="write the min-SOC matrix as full-matrix text")
    _common(p)
    p.set_defaults(func=cmd_tour)

    p = sub.add_parser("generate", help="write a random map")
    p.add_argument("--zones", type=int, default=15)
    p.add_argument("--width", type=float, default=12000.0)
    p.add_argument("--height", type=float, default=8000.0)
    p.add_argument("--targets", type=int, default=0)
    p.add_argument("--min-distance", type=float, default=1000.0)
    p.add_argument("--tour-params", action="store_true", help="use the tour energy rates")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("benchmark", help="compare methods on random scenarios (CSV)")
    p.add_argument("--map", default=None)
    p.add_argument("--zones", type=int, default=15)
    p.add_argument("--width", type=float, default=12000.0)
    p.add_argument("--height", type=float, default=8000.0)
    p.add_argument("--scenarios", type=int, default=10)
    p.add_argument("--min-distance", type=float, default=1000.0)
    p.add_argument("--methods", default="relaxed,exact,discrete")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("export-model", help="write the conic model as sparse text")
    p.add_argument("--map", required=True)
    p.add_argument("--relaxed", action="store_true")
    p.add_argument("--target-extent", type=float, default=100.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_model)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (QuietPathError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            print(f"invalid input: {exc}", file=sys.stderr)
            return EXIT_INPUT
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
