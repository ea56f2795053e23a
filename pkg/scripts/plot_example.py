"""Plan one path and one tour on generated maps and write SVG figures."""

import argparse
from pathlib import Path

from quietpath.graph import DEFAULT_TOUR_PARAMS
from quietpath.mapio import generate_map
from quietpath.planner import plan_path
from quietpath.svg import path_svg, tour_svg
from quietpath.tsp import TourPlanner, plan_tour_gtsp


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", default="figures")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    m = generate_map(15, seed=args.seed, min_distance=8000)
    res = plan_path(m, "exact")
    (out / "path.svg").write_text(path_svg(m, res.plan))
    print(f"path: fuel distance {res.cost:.2f}, gap {res.gap:.4f}")

    t = generate_map(6, 6000, 4000, args.seed, params=DEFAULT_TOUR_PARAMS, n_targets=6)
    tp = TourPlanner(t)
    plan = plan_tour_gtsp(t, d=3, planner=tp)
    (out / "tour.svg").write_text(tour_svg(t, tp.points, plan.tour.order, plan.legs))
    print(f"tour: order {plan.tour.order}, fuel distance {plan.cost:.2f}")


if __name__ == "__main__":
    main()
