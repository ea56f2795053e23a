"""Best-first branch-and-bound over the edge/side binaries of the conic model."""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..errors import DecodeError, InfeasibleError
from ..graph import EnergyParams, PlanningGraph
from ..model import (
    INT_TOL,
    ConicModel,
    PathSolution,
    VarIndex,
    build_fixed_path_restriction,
    build_rmicp,
    decode_solution,
)
from .conic import ConicConfig, ConicSolution, Status, make_workspace

log = logging.getLogger(__name__)

DEFAULT_BACKEND = "clarabel"


@dataclass
class BnBConfig:
    gap: float = 0.01
    time_limit: float | None = None      # seconds; None -> 5 s x max(1, |E| / 100)
    max_nodes: int = 100_000
    backend: str = DEFAULT_BACKEND
    eps: float = 1e-8
    dive: bool = True
    log_lines: bool = False


@dataclass
class BnBResult:
    incumbent: PathSolution | None
    lower_bound: float
    gap: float
    nodes_explored: int
    wall_time: float
    status: str                          # "optimal", "gap", "time_limit", "node_limit", "infeasible"
    trace: list[tuple] = field(default_factory=list)   # (node, bound, incumbent, wall)
    value: float = math.inf              # incumbent in model objective units (divided by the map scale)

    @property
    def objective(self) -> float:
        return self.value

    def log_rows(self) -> list[str]:
        rows = ["node,bound,incumbent,time"]
        rows += [f"{n},{b:.9g},{i:.9g},{t:.4f}" for n, b, i, t in self.trace]
        return rows


def default_time_limit(graph: PlanningGraph) -> float:
    return 5.0 * max(1.0, len(graph.edges) / 100.0)


def _conic_cfg(cfg: BnBConfig) -> ConicConfig:
    return ConicConfig(eps_abs=cfg.eps, eps_rel=cfg.eps, backend=cfg.backend)


def solve_relaxation(graph: PlanningGraph, params: EnergyParams, backend: str = DEFAULT_BACKEND):
    """Lower bound (unscaled units) from the model with binaries relaxed.

    Returns ``(math.inf, None)`` when the relaxation is infeasible, i.e. no
    path can satisfy the SOC bounds.
    """
    model, index = build_rmicp(graph, params, relaxed=True)
    sol = make_workspace(model, ConicConfig(eps_abs=1e-8, eps_rel=1e-8, backend=backend)).solve()
    if sol.status is Status.INFEASIBLE:
        return math.inf, None
    if not sol.ok:
        raise InfeasibleError(f"relaxation solve ended with status {sol.status.value}")
    return sol.objective / graph.scale, sol


def _gap(inc: float, lb: float) -> float:
    if not math.isfinite(inc):
        return math.inf
    if inc <= 1e-9:
        return 0.0
    return max(0.0, (inc - lb) / inc)


def _below(value: float, incumbent: float, rel: float = 1e-9) -> bool:
    """value < incumbent by more than a relative tolerance (always true without an incumbent)."""
    if not math.isfinite(incumbent):
        return True
    return value < incumbent - rel * max(1.0, abs(incumbent))


def _best_path(index: VarIndex, yv: np.ndarray, allowed: np.ndarray) -> list[int] | None:
    """Source-goal path maximizing the product of edge values (Dijkstra on -log y)."""
    adj: dict[int, list[tuple[int, float]]] = {}
    for k, d in enumerate(index.edges):
        if allowed[k] and yv[k] > 1e-6:
            adj.setdefault(d.tail, []).append((d.head, -math.log(min(yv[k], 1.0))))
    src, dst = PlanningGraph.SOURCE, PlanningGraph.GOAL
    dist = {src: 0.0}
    pred: dict[int, int] = {}
    heap = [(0.0, src)]
    done = set()
    while heap:
        dcur, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == dst:
            break
        for v, w in adj.get(u, []):
            nd = dcur + w
            if nd < dist.get(v, math.inf) - 1e-15:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
    if dst not in done:
        return None
    seq = [dst]
    while seq[-1] != src:
        seq.append(pred[seq[-1]])
    return seq[::-1]


def _restricted(graph: PlanningGraph, params: EnergyParams, seq, backend: str, eps: float):
    model, index = build_fixed_path_restriction(graph, params, seq)
    sol = make_workspace(model, ConicConfig(eps_abs=eps, eps_rel=eps, backend=backend)).solve()
    if not sol.ok:
        return None, None, None
    try:
        return decode_solution(index, sol.x, graph), sol.x, index
    except DecodeError:
        return None, None, None


def solve_fixed_path(graph: PlanningGraph, params: EnergyParams, seq, backend: str = DEFAULT_BACKEND,
                     eps: float = 1e-9) -> PathSolution | None:
    """Optimal plan along a fixed node sequence, or None if no SOC schedule exists."""
    return _restricted(graph, params, seq, backend, eps)[0]


def lift(full: VarIndex, part: VarIndex, xp: np.ndarray) -> np.ndarray:
    """Embed a restricted-model solution into the full model's columns (zeros elsewhere)."""
    x = np.zeros(full.n_cols)
    epos, spos = full.edge_position(), full.side_position()
    for k, d in enumerate(part.edges):
        j = epos[(d.tail, d.head)]
        for name in ("y", "a", "a2", "l", "c", "c2", "b"):
            src, dst = getattr(part, name)[k], getattr(full, name)[j]
            if src >= 0 and dst >= 0:
                x[dst] = xp[src]
    for k, v in enumerate(part.side_nodes):
        j = spos[v]
        for name in ("w", "e", "f", "S", "S_abs"):
            x[getattr(full, name)[j]] = xp[getattr(part, name)[k]]
    return x


def branch_and_bound(model: ConicModel, index: VarIndex, graph: PlanningGraph,
                     cfg: BnBConfig | None = None) -> BnBResult:
    """Best-first branch-and-bound; all objectives are reported in unscaled units."""
    cfg = cfg or BnBConfig()
    t0 = time.perf_counter()
    limit = default_time_limit(graph) if cfg.time_limit is None else cfg.time_limit
    gamma = graph.scale
    params = index.params
    ws = make_workspace(model, _conic_cfg(cfg))

    ncols = len(model.bound_cols)
    pos_of = {int(c): i for i, c in enumerate(model.bound_cols)}
    y_pos = np.array([pos_of[int(c)] for c in index.y], dtype=int)
    w_pos = np.array([pos_of[int(c)] for c in index.w], dtype=int)
    # branching priority: y before w, then column order
    kind = np.zeros(ncols, dtype=int)
    kind[w_pos] = 1

    incumbent: PathSolution | None = None
    inc_val = math.inf
    tried: set[tuple[int, ...]] = set()
    trace: list[tuple] = []
    counter = itertools.count()

    def value_of(xfull: np.ndarray) -> float:
        return float(model.c @ xfull) / gamma

    def offer(plan: PathSolution | None, value: float):
        nonlocal incumbent, inc_val
        # equal-cost alternatives keep the first one found, whatever the coordinate scale
        if plan is not None and _below(value, inc_val):
            incumbent, inc_val = plan, value

    def restricted(seq, backend, eps):
        plan, xp, part = _restricted(graph, params, seq, backend, eps)
        return (None, math.inf) if plan is None else (plan, value_of(lift(index, part, xp)))

    def dive(x: np.ndarray, hi: np.ndarray):
        seq = _best_path(index, x[index.y], hi[y_pos] > 0.5)
        if seq is None:
            return
        key = tuple(seq)
        if key in tried:
            return
        tried.add(key)
        offer(*restricted(seq, cfg.backend, 1e-9))

    def solve_node(lo, hi) -> ConicSolution:
        ws.update(b=model.rhs_with_bounds(lo, hi))
        return ws.solve()

    root_lo, root_hi = model.lo.copy(), model.hi.copy()
    heap: list = []
    nodes = 0
    status = "optimal"

    def push(bound, lo, hi, sol):
        heapq.heappush(heap, (bound, next(counter), lo, hi, sol))

    root = solve_node(root_lo, root_hi)
    nodes += 1
    if root.status is Status.INFEASIBLE:
        return BnBResult(None, math.inf, math.inf, nodes, time.perf_counter() - t0, "infeasible")
    if not root.ok:
        raise InfeasibleError(f"root relaxation ended with status {root.status.value}")
    push(root.objective / gamma, root_lo, root_hi, root)
    lower = root.objective / gamma

    while heap:
        bound, _, lo, hi, sol = heapq.heappop(heap)
        lower = min(bound, inc_val)
        trace.append((nodes, lower, inc_val, time.perf_counter() - t0))
        if cfg.log_lines:
            log.info("bnb,%d,%.9g,%.9g,%.4f", *trace[-1])
        if not _below(bound, inc_val):
            continue
        if _gap(inc_val, bound) <= cfg.gap:
            heapq.heappush(heap, (bound, next(counter), lo, hi, sol))
            status = "gap" if heap else "optimal"
            break
        if time.perf_counter() - t0 > limit:
            heapq.heappush(heap, (bound, next(counter), lo, hi, sol))
            status = "time_limit"
            break
        if nodes >= cfg.max_nodes:
            heapq.heappush(heap, (bound, next(counter), lo, hi, sol))
            status = "node_limit"
            break

        x = sol.x
        vals = x[model.bound_cols]
        frac = np.abs(vals - np.round(vals))
        y_frac = frac[y_pos]
        if y_frac.max(initial=0.0) <= INT_TOL:
            try:
                offer(decode_solution(index, x, graph), sol.objective / gamma)
            except DecodeError:
                pass
            # the relaxation optimum is attained by an integral point here
            if incumbent is not None and inc_val <= bound + 1e-7 * max(1.0, bound):
                continue
            if cfg.dive:
                dive(x, hi)
            continue
        if cfg.dive:
            dive(x, hi)

        cand = np.flatnonzero(frac > INT_TOL)
        order = np.lexsort((cand, kind[cand], -np.round(frac[cand], 6)))
        j = int(cand[order[0]])
        for val in (0.0, 1.0):
            clo, chi = lo.copy(), hi.copy()
            clo[j] = chi[j] = val
            child = solve_node(clo, chi)
            nodes += 1
            if child.status is Status.INFEASIBLE or not child.ok:
                continue
            cb = max(child.objective / gamma, bound)
            if _below(cb, inc_val):
                push(cb, clo, chi, child)

    if heap:
        lower = min(min(h[0] for h in heap), inc_val)
    else:
        lower = inc_val if math.isfinite(inc_val) else lower
        status = "optimal" if incumbent is not None else "infeasible"
    if incumbent is not None:
        polished, pval = restricted(incumbent.node_sequence, "clarabel", 1e-10)
        if polished is not None and polished.objective <= incumbent.objective + 1e-9:
            incumbent, inc_val = polished, pval
        lower = min(lower, inc_val)
    wall = time.perf_counter() - t0
    trace.append((nodes, lower, inc_val, wall))
    return BnBResult(incumbent, lower, _gap(inc_val, lower), nodes, wall, status, trace, inc_val)


def solve_exact(graph: PlanningGraph, params: EnergyParams, cfg: BnBConfig | None = None) -> BnBResult:
    model, index = build_rmicp(graph, params, relaxed=False)
    return branch_and_bound(model, index, graph, cfg)
