"""Multi-target tours: pairwise relaxed costs, SOC-level clusters, Noon-Bean, local-search ATSP.

Node 0 of every matrix is the source (where the tour starts and ends);
nodes 1..n are the targets. Missing arcs are ``np.inf``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, ValidationError
from .geometry import as_point
from .graph import QuietZoneMap, check_terminal
from .model import PathSolution
from .planner import PathPlanner, PlanConfig
from .solver.bnb import solve_relaxation

# ----------------------------------------------------------------------------
# cluster instances and the Noon-Bean reduction


@dataclass
class ClusterInstance:
    clusters: list[list[int]]     # node ids per cluster; nodes are 0..N-1
    cost: np.ndarray              # (N, N); np.inf where no arc
    levels: list[float | None] = field(default_factory=list)   # SOC level per node, if any

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        n = self.cost.shape[0]
        if self.cost.shape != (n, n):
            raise ValidationError("cost matrix must be square")
        seen = sorted(v for c in self.clusters for v in c)
        if any(len(c) == 0 for c in self.clusters):
            raise ValidationError("empty cluster")
        if seen != list(range(n)):
            raise ValidationError("clusters must partition the nodes")

    @property
    def n_nodes(self) -> int:
        return self.cost.shape[0]

    def cluster_of(self) -> np.ndarray:
        out = np.empty(self.n_nodes, dtype=int)
        for k, c in enumerate(self.clusters):
            out[c] = k
        return out

    def tour_cost(self, nodes: Sequence[int]) -> float:
        """Cost of the closed tour visiting ``nodes`` in order."""
        return float(sum(self.cost[a, b] for a, b in zip(nodes, list(nodes[1:]) + [nodes[0]])))


@dataclass
class NoonBean:
    matrix: np.ndarray
    M: float
    succ: np.ndarray              # successor of each node on its cluster's zero-cost cycle
    instance: ClusterInstance

    def detransform(self, order: Sequence[int]) -> list[int]:
        """One node per cluster, in visiting order, from an ATSP tour.

        A contiguous run through a cluster ends at the predecessor of the node
        whose outgoing cost it pays, so that node is the cycle-successor of
        the run's last node.
        """
        cl = self.instance.cluster_of()
        order = list(order)
        n = len(order)
        # rotate so a run starts at index 0
        start = next((i for i in range(n) if cl[order[i]] != cl[order[i - 1]]), 0)
        order = order[start:] + order[:start]
        runs: list[list[int]] = []
        for v in order:
            if runs and cl[runs[-1][-1]] == cl[v]:
                runs[-1].append(v)
            else:
                runs.append([v])
        if len(runs) == len(self.instance.clusters):
            return [int(self.succ[r[-1]]) for r in runs]
        # not contiguous (heuristic tours only): keep first appearances, pick levels by DP
        seen, cl_order = set(), []
        for v in order:
            if cl[v] not in seen:
                seen.add(cl[v])
                cl_order.append(cl[v])
        return best_nodes_for_order(self.instance, cl_order)[1]


def noon_bean(inst: ClusterInstance) -> NoonBean:
    C = inst.cost
    N = inst.n_nodes
    cl = inst.cluster_of()
    succ = np.arange(N)
    pred = np.arange(N)
    for c in inst.clusters:
        for a, b in zip(c, c[1:] + c[:1]):
            succ[a], pred[b] = b, a
    off = cl[:, None] != cl[None, :]
    finite = np.isfinite(C) & off
    M = 1.0 + float(C[finite].sum())
    T = np.full((N, N), np.inf)
    for c in inst.clusters:
        if len(c) > 1:
            for a in c:
                T[a, succ[a]] = 0.0
    rows, cols = np.nonzero(finite)
    T[pred[rows], cols] = C[rows, cols] + M
    np.fill_diagonal(T, np.inf)
    return NoonBean(T, M, succ, inst)


def best_nodes_for_order(inst: ClusterInstance, cl_order: Sequence[int]) -> tuple[float, list[int]]:
    """Cheapest node choice for a fixed cyclic cluster order (DP per start node)."""
    C = inst.cost
    best_cost, best_seq = math.inf, []
    for s in inst.clusters[cl_order[0]]:
        cost = {s: 0.0}
        back: list[dict] = []
        for k in cl_order[1:]:
            new, bp = {}, {}
            for v in inst.clusters[k]:
                val, u = min((cost[u] + C[u, v], u) for u in cost)
                new[v], bp[v] = val, u
            back.append(bp)
            cost = new
        if not back:
            return 0.0, [s]
        total, last = min((cost[u] + C[u, s], u) for u in cost)
        if total < best_cost:
            seq = [last]
            for bp in reversed(back):
                seq.append(bp[seq[-1]])
            best_cost, best_seq = total, seq[::-1]
    return best_cost, best_seq


# ----------------------------------------------------------------------------
# ATSP heuristic


@dataclass
class Tour:
    order: list[int]                       # node ids, starting with the source node 0
    cost: float
    levels: list[float | None] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"order": self.order, "cost": self.cost, "levels": self.levels}


def _tour_cost(C: np.ndarray, t: Sequence[int]) -> float:
    t = np.asarray(t)
    return float(C[t, np.roll(t, -1)].sum())


def _two_opt(C: np.ndarray, t: list[int]) -> tuple[list[int], bool]:
    """One pass of best-improvement asymmetric 2-opt (segment reversal)."""
    n = len(t)
    improved = False
    while True:
        arr = np.asarray(t)
        nxt = np.roll(arr, -1)
        fwd = np.concatenate([[0.0], np.cumsum(C[arr, nxt])])       # fwd[k] = sum of arcs before k
        rev = np.concatenate([[0.0], np.cumsum(C[nxt, arr])])
        best, move = -1e-12, None
        for i in range(0, n - 2):
            j = np.arange(i + 2, n if i > 0 else n - 1)
            if len(j) == 0:
                continue
            a, b = arr[i], arr[i + 1]
            c, d = arr[j], arr[(j + 1) % n]
            seg_f = fwd[j] - fwd[i + 1]
            seg_r = rev[j] - rev[i + 1]
            delta = (C[a, b] + C[c, d] + seg_f) - (C[a, c] + C[b, d] + seg_r)
            k = int(np.argmax(delta))
            if delta[k] > best:
                best, move = delta[k], (i, int(j[k]))
        if move is None:
            return t, improved
        i, j = move
        t = t[: i + 1] + t[i + 1: j + 1][::-1] + t[j + 1:]
        improved = True


def _or_opt(C: np.ndarray, t: list[int]) -> tuple[list[int], bool]:
    """Move a segment of 1-3 nodes elsewhere (first improvement)."""
    n = len(t)
    improved_any = False
    improved = True
    while improved:
        improved = False
        base = _tour_cost(C, t)
        for L in (1, 2, 3):
            if L >= n - 1:
                break
            for i in range(1, n - L + 1):
                seg = t[i: i + L]
                rest = t[:i] + t[i + L:]
                for rev in (False, True):
                    s = seg[::-1] if rev else seg
                    for p in range(len(rest)):
                        if p == i - 1 and not rev:
                            continue
                        cand = rest[: p + 1] + s + rest[p + 1:]
                        c = _tour_cost(C, cand)
                        if c < base - 1e-12:
                            t, base, improved, improved_any = cand, c, True, True
                            break
                    if improved:
                        break
                if improved:
                    break
            if improved:
                break
    return t, improved_any


def _local_search(C: np.ndarray, t: list[int]) -> list[int]:
    while True:
        t, a = _two_opt(C, t)
        t, b = _or_opt(C, t)
        if not (a or b):
            return t


def _nearest_neighbor(C: np.ndarray, start: int, rng: np.random.Generator | None) -> list[int]:
    n = len(C)
    t = [start]
    left = set(range(n)) - {start}
    while left:
        cur = t[-1]
        cand = sorted(left, key=lambda v: (C[cur, v], v))
        if rng is not None and len(cand) > 1 and rng.random() < 0.3:
            v = cand[1]
        else:
            v = cand[0]
        t.append(v)
        left.remove(v)
    return t


def _rotate(t: list[int], first: int = 0) -> list[int]:
    k = t.index(first)
    return t[k:] + t[:k]


def solve_atsp(matrix, seed: int = 0, starts: int = 8, kicks: int = 30) -> Tour:
    """Multi-start nearest neighbour + asymmetric 2-opt + Or-opt, with double-bridge kicks."""
    C0 = np.array(matrix, dtype=float)
    n = C0.shape[0]
    if C0.shape != (n, n) or n < 1:
        raise ValidationError("matrix must be square")
    if n == 1:
        return Tour([0], 0.0)
    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        if not np.isfinite(C0[i][off[i]]).any():
            raise InfeasibleError(f"node {i} has no finite outgoing arc")
        if not np.isfinite(C0[:, i][off[:, i]]).any():
            raise InfeasibleError(f"node {i} has no finite incoming arc")
    finite = C0[np.isfinite(C0) & off]
    big = (np.abs(finite).max(initial=0.0) + 1.0) * n * 10.0
    C = np.where(np.isfinite(C0), C0, big)
    np.fill_diagonal(C, 0.0)
    rng = np.random.default_rng(seed)
    best_t, best_c = None, math.inf
    for k in range(starts):
        if k == 0:
            t = _nearest_neighbor(C, 0, None)
        else:
            t = _nearest_neighbor(C, int(rng.integers(n)), rng)
        t = _local_search(C, t)
        cur_c = _tour_cost(C, t)
        if n >= 8:
            for _ in range(kicks):
                a, b, c = sorted(rng.choice(np.arange(1, n), size=3, replace=False))
                cand = t[:a] + t[b:c] + t[a:b] + t[c:]
                cand = _local_search(C, cand)
                cc = _tour_cost(C, cand)
                if cc < cur_c - 1e-12:
                    t, cur_c = cand, cc
        if cur_c < best_c - 1e-12:
            best_t, best_c = t, cur_c
    order = _rotate(best_t, 0)
    cost = _tour_cost(C0, order)
    if not math.isfinite(cost):
        raise InfeasibleError("no tour with finite cost was found")
    return Tour(order, cost)


def export_atsp(matrix, path, inf_token: str = "inf") -> None:
    """Full-matrix text: first line N, then N rows of space-separated costs."""
    C = np.asarray(matrix, dtype=float)
    with open(path, "w") as fh:
        fh.write(f"{C.shape[0]}\n")
        for row in C:
            fh.write(" ".join(inf_token if not math.isfinite(v) else repr(float(v)) for v in row) + "\n")


def import_atsp(path) -> np.ndarray:
    with open(path) as fh:
        n = int(fh.readline())
        rows = [[float(v) for v in fh.readline().split()] for _ in range(n)]
    return np.asarray(rows, dtype=float)


# ----------------------------------------------------------------------------
# cost matrices from the relaxed model


def soc_levels(params, d: int) -> list[float]:
    if d < 1:
        raise ValidationError("need at least one SOC level")
    if d == 1:
        return [params.q_min]
    return [float(v) for v in np.linspace(params.q_min, params.q_max, d)]


class TourPlanner:
    """Caches the scaled map, side graph and terminal edges across the many leg solves."""

    def __init__(self, m: QuietZoneMap, targets=None, cfg: PlanConfig | None = None):
        targets = list(m.targets if targets is None else targets)
        if len(targets) < 1:
            raise ValidationError("no targets given")
        self.points = [as_point(m.source)] + [as_point(t) for t in targets]
        for k, p in enumerate(self.points):
            check_terminal(p, m.zones, "target" if k else "source")
        if len(set(self.points)) != len(self.points):
            raise ValidationError("targets must be distinct from each other and from the source")
        self.map = m
        self.params = m.params
        self.planner = PathPlanner(m, cfg)
        self.solves = 0

    @property
    def n(self) -> int:
        return len(self.points) - 1

    def relaxed_cost(self, i: int, j: int, q_init: float, q_goal_min: float | None = None) -> float:
        pl = self.planner
        params = pl.scaled.params.with_soc(q_init=q_init, q_goal_min=q_goal_min)
        graph = pl.graph(self.points[i], self.points[j])
        self.solves += 1
        bound, _ = solve_relaxation(graph, params, pl.cfg.backend)
        return bound

    def minsoc_matrix(self) -> np.ndarray:
        """Departure at q_min (q_init from the source), arrival anywhere in bounds."""
        N = len(self.points)
        C = np.full((N, N), np.inf)
        for i, j in itertools.permutations(range(N), 2):
            q0 = self.params.q_init if i == 0 else self.params.q_min
            C[i, j] = self.relaxed_cost(i, j, q0)
        return C

    def gtsp_instance(self, d: int) -> ClusterInstance:
        """Cluster per target with one node per SOC level; the source is a singleton cluster.

        Entry (i@l, j@m) departs i at level l and must arrive at j with SOC >= m.
        """
        lv = soc_levels(self.params, d)
        nodes = [(0, None)] + [(t, q) for t in range(1, len(self.points)) for q in lv]
        clusters = [[0]] + [list(range(1 + k * d, 1 + (k + 1) * d)) for k in range(self.n)]
        N = len(nodes)
        C = np.full((N, N), np.inf)
        for a, (i, qa) in enumerate(nodes):
            for b, (j, qb) in enumerate(nodes):
                if i == j:
                    continue
                q0 = self.params.q_init if i == 0 else qa
                C[a, b] = self.relaxed_cost(i, j, q0, q_goal_min=qb)
        return ClusterInstance(clusters, C, [q for _, q in nodes])

    def stitch(self, order: Sequence[int], arrival_levels: Sequence[float | None] | None = None) -> list[PathSolution]:
        """Exact legs in tour order, each departing with the previous leg's actual arrival SOC."""
        seq = list(order) + [order[0]]
        q = self.params.q_init
        legs = []
        for k, (i, j) in enumerate(zip(seq, seq[1:])):
            qmin = None if arrival_levels is None else arrival_levels[k + 1 if k + 1 < len(order) else 0]
            res = self.planner.solve("exact", self.points[i], self.points[j], q_init=q, q_goal_min=qmin)
            if not res.feasible:
                raise InfeasibleError(f"leg {k} ({i} -> {j}) has no feasible plan")
            legs.append(res.plan)
            q = float(np.clip(res.plan.q_final, self.params.q_min, self.params.q_max))
        return legs


@dataclass
class TourPlan:
    method: str
    tour: Tour
    legs: list[PathSolution]
    matrix_cost: float
    solves: int = 0

    @property
    def cost(self) -> float:
        return float(sum(l.objective for l in self.legs))

    def as_dict(self) -> dict:
        return {"method": self.method, "order": self.tour.order, "levels": self.tour.levels,
                "cost": self.cost, "matrix_cost": self.matrix_cost, "relaxed_solves": self.solves,
                "legs": [l.as_dict() for l in self.legs]}


def plan_tour_minsoc(m: QuietZoneMap, targets=None, cfg: PlanConfig | None = None, seed: int = 0,
                     planner: TourPlanner | None = None) -> TourPlan:
    tp = planner or TourPlanner(m, targets, cfg)
    C = tp.minsoc_matrix()
    tour = solve_atsp(C, seed=seed)
    legs = tp.stitch(tour.order)
    return TourPlan("minsoc", tour, legs, tour.cost, tp.solves)


def plan_tour_gtsp(m: QuietZoneMap, targets=None, d: int = 3, cfg: PlanConfig | None = None, seed: int = 0,
                   planner: TourPlanner | None = None) -> TourPlan:
    tp = planner or TourPlanner(m, targets, cfg)
    inst = tp.gtsp_instance(d)
    nb = noon_bean(inst)
    atsp = solve_atsp(nb.matrix, seed=seed)
    reps = nb.detransform(atsp.order)
    k = reps.index(0)
    reps = reps[k:] + reps[:k]
    cl = inst.cluster_of()
    order = [int(cl[v]) for v in reps]          # cluster k <-> point k
    levels = [inst.levels[v] for v in reps]
    legs = tp.stitch(order, levels)
    tour = Tour(order, inst.tour_cost(reps), levels)
    return TourPlan("gtsp", tour, legs, tour.cost, tp.solves)
