"""Min-SOC tours against generalized-TSP tours over SOC levels on random target sets."""

import argparse
import time

from quietpath.graph import DEFAULT_TOUR_PARAMS
from quietpath.mapio import generate_map
from quietpath.tsp import TourPlanner, plan_tour_gtsp, plan_tour_minsoc


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--targets", type=int, default=8)
    ap.add_argument("--zones", type=int, default=6)
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--width", type=float, default=6000.0)
    ap.add_argument("--height", type=float, default=4000.0)
    args = ap.parse_args(argv)

    print("seed,targets,minsoc,gtsp,percent_difference,seconds")
    for seed in range(args.instances):
        m = generate_map(args.zones, args.width, args.height, seed, params=DEFAULT_TOUR_PARAMS,
                         n_targets=args.targets)
        t0 = time.perf_counter()
        tp = TourPlanner(m)
        a = plan_tour_minsoc(m, planner=tp)
        g = plan_tour_gtsp(m, d=args.d, planner=tp)
        diff = 100.0 * (a.cost - g.cost) / g.cost if g.cost > 0 else 0.0
        print(f"{seed},{args.targets},{a.cost:.3f},{g.cost:.3f},{diff:.3f},{time.perf_counter() - t0:.1f}",
              flush=True)


if __name__ == "__main__":
    main()
