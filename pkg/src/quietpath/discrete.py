"""Discretized baseline: boundary samples x SOC levels, searched with Dijkstra.

SOC landings are rounded down to the level grid, so every discrete path is
feasible for the continuous problem and its cost is an upper bound.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .geometry import Point2D, as_point, segments_blocked
from .graph import EnergyParams, QuietZoneMap, check_terminal
from .model import PathSolution, TravelSegment, _segment_mode

LEVEL_EPS = 1e-9


@dataclass(frozen=True)
class DiscreteConfig:
    soc_levels: int = 10
    spacing: float = 100.0   # unscaled map units

    def __post_init__(self):
        if self.soc_levels < 2:
            raise ValidationError("soc_levels must be at least 2")
        if not self.spacing > 0:
            raise ValidationError("spacing must be positive")


@dataclass
class DiscreteGraph:
    points: np.ndarray           # (P, 2), scaled coordinates
    zone_of: np.ndarray          # zone id per point, -1 for terminals
    levels: np.ndarray
    params: EnergyParams         # scaled rates
    scale: float
    source: int
    goal: int
    nbr: list[tuple[np.ndarray, np.ndarray, np.ndarray]]   # per point: (targets, lengths, fuel_allowed)
    build_time: float = 0.0

    @property
    def n_states(self) -> int:
        return len(self.points) * len(self.levels)

    @property
    def n_arcs(self) -> int:
        return sum(len(t) for t, _, _ in self.nbr)


@dataclass
class DiscreteResult:
    cost: float                       # search cost in unscaled units (inf when unreachable)
    trace: PathSolution | None
    points: list[Point2D]
    level_sequence: list[int]
    graph_time: float
    search_time: float

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.cost)


def sample_boundary(zones, spacing: float) -> tuple[np.ndarray, np.ndarray]:
    """Points every ``spacing`` along each side, measured from the side's first vertex.

    The far vertex is the next side's first point, so vertices appear once.
    Halving the spacing yields a superset of the points.
    """
    pts, owner = [], []
    for zid, zone in enumerate(zones):
        for a, b in zone.edges():
            a_, b_ = np.asarray(a), np.asarray(b)
            length = float(np.linalg.norm(b_ - a_))
            steps = np.arange(0.0, length, spacing)
            steps = steps[(steps == 0.0) | (length - steps > 1e-9 * max(1.0, length))]
            for d in steps:
                pts.append(a_ + (d / length) * (b_ - a_))
                owner.append(zid)
    return np.asarray(pts, dtype=float).reshape(-1, 2), np.asarray(owner, dtype=int)


def build_discrete_graph(m: QuietZoneMap, s=None, g=None, cfg: DiscreteConfig | None = None) -> DiscreteGraph:
    cfg = cfg or DiscreteConfig()
    t0 = time.perf_counter()
    s = as_point(m.source if s is None else s)
    g = as_point(m.goal if g is None else g)
    check_terminal(s, m.zones, "source")
    check_terminal(g, m.zones, "goal")
    params = m.params
    pts, owner = sample_boundary(m.zones, cfg.spacing * m.scale)
    pts = np.vstack([[s, g], pts])
    owner = np.concatenate([[-1, -1], owner])
    P = len(pts)
    iu, ju = np.triu_indices(P, k=1)
    blocked = segments_blocked(pts[iu], pts[ju], m.zones).any(axis=1)
    same_zone = (owner[iu] == owner[ju]) & (owner[iu] >= 0)
    lengths = np.linalg.norm(pts[iu] - pts[ju], axis=1)
    span = params.q_max - params.q_min
    free = ~blocked
    # chords of one zone are electric only; longer ones can never be flown
    intra = blocked & same_zone & (params.alpha * lengths <= span + 1e-12)
    keep = (free | intra) & (lengths > 0)
    iu, ju, lengths, free = iu[keep], ju[keep], lengths[keep], free[keep]
    nbr = []
    src = np.concatenate([iu, ju])
    dst = np.concatenate([ju, iu])
    L2 = np.concatenate([lengths, lengths])
    F2 = np.concatenate([free, free])
    order = np.lexsort((dst, src))
    src, dst, L2, F2 = src[order], dst[order], L2[order], F2[order]
    bounds = np.searchsorted(src, np.arange(P + 1))
    for p in range(P):
        a, b = bounds[p], bounds[p + 1]
        nbr.append((dst[a:b], L2[a:b], F2[a:b]))
    levels = np.linspace(params.q_min, params.q_max, cfg.soc_levels)
    return DiscreteGraph(pts, owner, levels, params, m.scale, 0, 1, nbr, time.perf_counter() - t0)


def level_floor(levels: np.ndarray, q) -> np.ndarray:
    """Index of the highest level <= q (-1 when below every level)."""
    return np.searchsorted(levels, np.asarray(q) + LEVEL_EPS, side="right") - 1


def discrete_shortest_path(dg: DiscreteGraph, q_init: float | None = None) -> DiscreteResult:
    """Least-fuel path to a goal level inside the goal SOC window.

    Ties go to fewer hops, then to the lower state id.
    """
    t0 = time.perf_counter()
    pr = dg.params
    al, be = pr.alpha, pr.beta
    levels = dg.levels
    K = len(levels)
    q0 = pr.q_init if q_init is None else q_init
    i0 = int(level_floor(levels, q0))
    if i0 < 0:
        raise ValidationError("initial SOC below the lowest level")
    if pr.q_goal_max < pr.q_max:
        raise ValidationError("the discrete baseline supports only a lower goal SOC bound")
    # landings round down, so the exact arrival SOC is at least the level reached
    goal_ok = levels >= pr.q_goal_min - LEVEL_EPS
    P = len(dg.points)
    dist = np.full((P, K), np.inf)
    hops = np.full((P, K), np.iinfo(np.int64).max, dtype=np.int64)
    pred = np.full((P, K), -1, dtype=np.int64)
    done = np.zeros((P, K), dtype=bool)
    dist[dg.source, i0] = 0.0
    hops[dg.source, i0] = 0
    heap = [(0.0, 0, dg.source * K + i0)]
    found = -1
    while heap:
        d, h, sid = heapq.heappop(heap)
        p, i = divmod(sid, K)
        if done[p, i] or d > dist[p, i]:
            continue
        done[p, i] = True
        if p == dg.goal and goal_ok[i]:
            found = sid
            break
        tgt, L, free = dg.nbr[p]
        if len(tgt) == 0:
            continue
        q = levels[i]
        landing = q - al * L
        j0 = level_floor(levels, landing)
        # fuel needed to land exactly on each level
        Z = (levels[None, :] - q + al * L[:, None]) / (al + be)
        ok = (levels[None, :] > landing[:, None] + LEVEL_EPS) & (Z <= L[:, None] + 1e-12) & free[:, None]
        cost = np.where(ok, d + np.maximum(Z, 0.0), np.inf)
        rows = np.nonzero(j0 >= 0)[0]
        cost[rows, j0[rows]] = d
        cand = dist[tgt]
        hcand = hops[tgt]
        with np.errstate(invalid="ignore"):
            better = (cost < cand - 1e-12) | ((np.abs(cost - cand) <= 1e-12) & (h + 1 < hcand))
        better &= np.isfinite(cost) & ~done[tgt]
        r, c = np.nonzero(better)
        if len(r) == 0:
            continue
        tp = tgt[r]
        dist[tp, c] = cost[r, c]
        hops[tp, c] = h + 1
        pred[tp, c] = sid
        for pp, cc, dv in zip(tp.tolist(), c.tolist(), cost[r, c].tolist()):
            heapq.heappush(heap, (dv, h + 1, pp * K + cc))
    search_time = time.perf_counter() - t0
    if found < 0:
        return DiscreteResult(math.inf, None, [], [], dg.build_time, search_time)
    states = [found]
    while states[-1] != dg.source * K + i0:
        states.append(int(pred[divmod(states[-1], K)]))
    states.reverse()
    pts = [int(s // K) for s in states]
    lv = [int(s % K) for s in states]
    cost = float(dist[divmod(found, K)]) / dg.scale
    trace = _unquantize(dg, pts, lv, q0)
    return DiscreteResult(cost, trace, [Point2D(*(dg.points[p] / dg.scale)) for p in pts], lv,
                          dg.build_time, search_time)


def _unquantize(dg: DiscreteGraph, pts: list[int], lv: list[int], q0: float) -> PathSolution:
    """Replay the path with exact SOC, taking only the fuel each level target still needs."""
    gamma = dg.scale
    up = dg.params.scaled(1.0 / gamma)
    al, be = up.alpha, up.beta
    segs = []
    q = q0
    for a, b, j in zip(pts, pts[1:], lv[1:]):
        A = Point2D(*(dg.points[a] / gamma))
        B = Point2D(*(dg.points[b] / gamma))
        L = math.dist(A, B)
        lookup = dg.nbr[a]
        k = int(np.searchsorted(lookup[0], b))
        free = bool(lookup[2][k])
        z = 0.0
        if free:
            z = min(max((dg.levels[j] - q + al * L) / (al + be), 0.0), L)
        q_end = q + be * z - al * (L - z)
        segs.append(TravelSegment(A, B, L, z, "inter" if free else "intra", _segment_mode(L, z, q, up),
                                  a, b, q, q_end))
        q = q_end
    q_nodes = [q0] + [s.q_end for s in segs]
    return PathSolution(
        node_sequence=list(pts), lam_entry=[], lam_exit=[],
        q_entry=q_nodes, q_exit=q_nodes,
        edge_length=[s.length for s in segs], edge_fuel=[s.fuel for s in segs],
        side_length=[], side_fuel=[], segments=segs,
        objective=float(sum(s.fuel for s in segs)),
        q_start=q0, q_goal_min=up.q_goal_min, q_goal_max=up.q_goal_max, scale=gamma,
    )


def solve_discrete(m: QuietZoneMap, s=None, g=None, cfg: DiscreteConfig | None = None) -> DiscreteResult:
    dg = build_discrete_graph(m, s, g, cfg)
    return discrete_shortest_path(dg)
