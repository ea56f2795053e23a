"""High-level entry points: scale a map, build its graph, run one of the path methods."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from .discrete import DiscreteConfig, solve_discrete
from .errors import InfeasibleError, ValidationError
from .geometry import Point2D
from .graph import DEFAULT_TARGET_EXTENT, QuietZoneMap, SideGraph, build_graph, build_side_graph, scale_map
from .model import PathSolution, build_rmicp
from .solver.bnb import DEFAULT_BACKEND, BnBConfig, branch_and_bound, solve_relaxation
from .validate import certify

METHODS = ("relaxed", "exact", "discrete")


@dataclass
class PlanConfig:
    target_extent: float = DEFAULT_TARGET_EXTENT
    gap: float = 0.01
    time_limit: float | None = None
    backend: str = DEFAULT_BACKEND
    discrete: DiscreteConfig = field(default_factory=DiscreteConfig)

    def bnb(self) -> BnBConfig:
        return BnBConfig(gap=self.gap, time_limit=self.time_limit, backend=self.backend)


@dataclass
class PathResult:
    method: str
    cost: float                 # unscaled fuel distance; inf when infeasible
    bound: float | None
    gap: float | None
    plan: PathSolution | None
    graph_time: float
    opt_time: float
    scale: float
    status: str
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.cost)

    def record(self) -> dict:
        def num(v):
            return None if v is None or not math.isfinite(v) else float(v)
        return {
            "method": self.method, "status": self.status, "cost": num(self.cost),
            "bound": num(self.bound), "gap": num(self.gap), "gamma": self.scale,
            "graph_time": self.graph_time, "opt_time": self.opt_time, "nodes": self.nodes,
            "plan": None if self.plan is None else self.plan.as_dict(),
        }


class PathPlanner:
    """Holds the scaled map and the terminal-independent side graph for repeated queries."""

    def __init__(self, m: QuietZoneMap, cfg: PlanConfig | None = None):
        self.map = m
        self.cfg = cfg or PlanConfig()
        self.scaled = scale_map(m, self.cfg.target_extent)
        self.gamma = self.scaled.scale / m.scale
        t0 = time.perf_counter()
        self.side_graph: SideGraph = build_side_graph(self.scaled.zones)
        self.side_graph_time = time.perf_counter() - t0
        self.terminal_cache: dict = {}

    def _scaled_point(self, p):
        p = self.map.source if p is None else p
        return Point2D(p[0] * self.gamma, p[1] * self.gamma)

    def graph(self, s=None, g=None):
        s = self.map.source if s is None else s
        g = self.map.goal if g is None else g
        if g is None:
            raise ValidationError("no goal given")
        return build_graph(self.scaled, self._scaled_point(s), self._scaled_point(g), self.side_graph,
                           self.terminal_cache)

    def solve(self, method: str = "exact", s=None, g=None, q_init=None, q_goal_min=None,
              q_goal_max=None, certify_plan: bool = True) -> PathResult:
        if method not in METHODS:
            raise ValidationError(f"unknown method {method!r}")
        params = self.scaled.params.with_soc(
            q_init=self.scaled.params.q_init if q_init is None else q_init,
            q_goal_min=q_goal_min, q_goal_max=q_goal_max)
        if method == "discrete":
            return self._discrete(s, g, params)
        t0 = time.perf_counter()
        graph = self.graph(s, g)
        graph_time = time.perf_counter() - t0 + self.side_graph_time
        t1 = time.perf_counter()
        if method == "relaxed":
            bound, _ = solve_relaxation(graph, params, self.cfg.backend)
            status = "optimal" if math.isfinite(bound) else "infeasible"
            return PathResult(method, bound, bound, 0.0 if math.isfinite(bound) else None, None,
                              graph_time, time.perf_counter() - t1, self.scaled.scale, status, 1)
        model, index = build_rmicp(graph, params, relaxed=False)
        res = branch_and_bound(model, index, graph, self.cfg.bnb())
        opt_time = time.perf_counter() - t1
        plan = res.incumbent
        if plan is not None and certify_plan:
            certify(plan, params.scaled(1.0 / self.scaled.scale), self.map.zones)
        cost = plan.objective if plan is not None else math.inf
        return PathResult(method, cost, res.lower_bound, res.gap if plan is not None else None, plan,
                          graph_time, opt_time, self.scaled.scale, res.status, res.nodes_explored)

    def _discrete(self, s, g, params) -> PathResult:
        sm = QuietZoneMap(self.scaled.zones, self.scaled.source, self.scaled.goal, (), params, self.scaled.scale)
        s_ = self._scaled_point(s)
        g_ = self._scaled_point(self.map.goal if g is None else g)
        res = solve_discrete(sm, s_, g_, self.cfg.discrete)
        if res.trace is not None:
            certify(res.trace, params.scaled(1.0 / self.scaled.scale), self.map.zones)
        status = "optimal" if res.feasible else "infeasible"
        return PathResult("discrete", res.cost, None, None, res.trace, res.graph_time, res.search_time,
                          self.scaled.scale, status)


def plan_path(m: QuietZoneMap, method: str = "exact", s=None, g=None, cfg: PlanConfig | None = None) -> PathResult:
    return PathPlanner(m, cfg).solve(method, s, g)


def require_feasible(res: PathResult, what: str = "path") -> PathResult:
    if not res.feasible:
        raise InfeasibleError(f"no feasible {what}")
    return res
