"""Solve the same maps at several internal extents and report the spread of unscaled objectives."""

import argparse

from quietpath.mapio import generate_map
from quietpath.planner import PathPlanner, PlanConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--maps", type=int, default=10)
    ap.add_argument("--extents", default="50,100,200")
    args = ap.parse_args(argv)
    extents = [float(e) for e in args.extents.split(",")]

    print("seed," + ",".join(f"E={e:g}" for e in extents) + ",max_rel_spread,same_nodes")
    for seed in range(args.maps):
        m = generate_map(4 + seed % 5, 5000, 3500, seed, min_distance=3000, vertices=(4, 5),
                         radius=(250.0, 700.0))
        res = [PathPlanner(m, PlanConfig(target_extent=e)).solve("exact") for e in extents]
        costs = [r.cost for r in res]
        spread = (max(costs) - min(costs)) / max(1.0, abs(costs[0]))
        same = all(r.plan.node_sequence == res[0].plan.node_sequence for r in res)
        print(f"{seed}," + ",".join(f"{c:.6f}" for c in costs) + f",{spread:.2e},{same}")


if __name__ == "__main__":
    main()
