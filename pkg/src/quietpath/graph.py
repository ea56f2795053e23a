"""Problem instances, coordinate scaling and the side graph the conic model is built on."""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .geometry import (
    FULL_BOX,
    BoundaryParams,
    ConvexPolygon,
    Point2D,
    Side,
    as_point,
    boundary_params,
    classify_visibility,
    convex_hull,
    polygons_disjoint,
    segment_blocked,
)

MIN_SIDE_LENGTH = 1e-6
DEFAULT_TARGET_EXTENT = 100.0


@dataclass(frozen=True)
class EnergyParams:
    """Battery model: SOC falls by ``alpha`` per unit electric distance and rises by
    ``beta`` per unit fuel distance. SOC values are percentages."""

    alpha: float
    beta: float
    q_min: float
    q_max: float
    q_init: float
    q_goal_min: float | None = None
    q_goal_max: float | None = None

    def __post_init__(self):
        if self.q_goal_min is None:
            object.__setattr__(self, "q_goal_min", self.q_min)
        if self.q_goal_max is None:
            object.__setattr__(self, "q_goal_max", self.q_max)
        vals = (self.alpha, self.beta, self.q_min, self.q_max, self.q_init,
                self.q_goal_min, self.q_goal_max)
        if not all(math.isfinite(v) for v in vals):
            raise ValidationError("energy parameters must be finite")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        if not (0 <= self.q_min < self.q_max):
            raise ValidationError("need 0 <= q_min < q_max")
        if not (self.q_min <= self.q_init <= self.q_max):
            raise ValidationError("q_init must lie in [q_min, q_max]")
        if not (self.q_min <= self.q_goal_min <= self.q_goal_max <= self.q_max):
            raise ValidationError("need q_min <= q_goal_min <= q_goal_max <= q_max")

    def scaled(self, gamma: float) -> "EnergyParams":
        """Rates for coordinates multiplied by ``gamma`` (SOC per distance is invariant)."""
        return replace(self, alpha=self.alpha / gamma, beta=self.beta / gamma)

    def with_soc(self, q_init=None, q_goal_min=None, q_goal_max=None) -> "EnergyParams":
        return replace(
            self,
            q_init=self.q_init if q_init is None else q_init,
            q_goal_min=self.q_min if q_goal_min is None else q_goal_min,
            q_goal_max=self.q_max if q_goal_max is None else q_goal_max,
        )

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "q_min": self.q_min,
                "q_max": self.q_max, "q_init": self.q_init}


DEFAULT_PATH_PARAMS = EnergyParams(alpha=0.08, beta=0.04, q_min=20.0, q_max=100.0, q_init=100.0)
DEFAULT_TOUR_PARAMS = EnergyParams(alpha=0.1, beta=0.05, q_min=20.0, q_max=100.0, q_init=100.0)


@dataclass(frozen=True)
class QuietZoneMap:
    zones: tuple[ConvexPolygon, ...]
    source: Point2D
    goal: Point2D | None = None
    targets: tuple[Point2D, ...] = ()
    params: EnergyParams = DEFAULT_PATH_PARAMS
    scale: float = 1.0

    @classmethod
    def from_raw(cls, zones, source, goal=None, targets=(), params=DEFAULT_PATH_PARAMS) -> "QuietZoneMap":
        """Build and validate a map; non-convex zones are replaced by their hull."""
        m = cls(
            zones=tuple(convex_hull(z) for z in zones),
            source=as_point(source),
            goal=None if goal is None else as_point(goal),
            targets=tuple(as_point(t) for t in targets),
            params=params,
        )
        validate_map(m)
        return m

    def points(self) -> list[Point2D]:
        pts = [self.source] + list(self.targets)
        if self.goal is not None:
            pts.append(self.goal)
        for z in self.zones:
            pts.extend(z.vertices)
        return pts

    def with_terminals(self, source=None, goal=None) -> "QuietZoneMap":
        return replace(
            self,
            source=self.source if source is None else as_point(source),
            goal=self.goal if goal is None else as_point(goal),
        )


def check_terminal(p: Point2D, zones: Sequence[ConvexPolygon], name: str = "terminal") -> None:
    for i, z in enumerate(zones):
        if z.contains(p, strict=True):
            raise ValidationError(f"{name} {tuple(p)} lies strictly inside zone {i}")


def validate_map(m: QuietZoneMap) -> None:
    for i, j in itertools.combinations(range(len(m.zones)), 2):
        if not polygons_disjoint(m.zones[i], m.zones[j]):
            raise ValidationError(f"zones {i} and {j} overlap or touch")
    check_terminal(m.source, m.zones, "source")
    if m.goal is not None:
        check_terminal(m.goal, m.zones, "goal")
    for k, t in enumerate(m.targets):
        check_terminal(t, m.zones, f"target {k}")


def map_extent(m: QuietZoneMap) -> tuple[float, float]:
    pts = np.asarray(m.points(), dtype=float)
    span = np.ptp(pts, axis=0)
    return float(span[0]), float(span[1])


def scale_map(m: QuietZoneMap, target_extent: float = DEFAULT_TARGET_EXTENT) -> QuietZoneMap:
    """Shrink coordinates so the map fits ``target_extent``; rates grow by the inverse.

    Maps that already fit are returned unchanged. The cumulative factor is kept
    in ``scale`` so distances can be mapped back by dividing by it.
    """
    if target_extent <= 0:
        raise ValidationError("target_extent must be positive")
    width, height = map_extent(m)
    extent = max(width, height)
    if extent <= 0:
        raise ValidationError("map has zero extent")
    gamma = target_extent / extent
    if gamma >= 1.0:
        return m

    def sc(p):
        return Point2D(p.x * gamma, p.y * gamma)

    return QuietZoneMap(
        zones=tuple(z.scaled(gamma) for z in m.zones),
        source=sc(m.source),
        goal=None if m.goal is None else sc(m.goal),
        targets=tuple(sc(t) for t in m.targets),
        params=m.params.scaled(gamma),
        scale=m.scale * gamma,
    )


class EdgeKind(enum.Enum):
    INTRA = "Intra"
    INTER = "Inter"


@dataclass(frozen=True)
class Edge:
    """Undirected edge; ``params`` lo_u/hi_u refer to node ``u``."""

    u: int
    v: int
    kind: EdgeKind
    params: BoundaryParams


@dataclass(frozen=True)
class DirectedEdge:
    tail: int
    head: int
    kind: EdgeKind
    params: BoundaryParams  # lo_u/hi_u on the tail side


@dataclass
class SideGraph:
    """Side nodes and side-to-side edges of a zone set, reusable across terminal pairs."""

    zones: tuple[ConvexPolygon, ...]
    sides: list[Side]
    edges: list[tuple[int, int, EdgeKind, BoundaryParams]]  # indices into ``sides``


def zone_sides(zones: Sequence[ConvexPolygon]) -> list[Side]:
    sides = []
    for zid, zone in enumerate(zones):
        for i, (a, b) in enumerate(zone.edges()):
            s = Side(zid, i, a, b)
            if s.length >= MIN_SIDE_LENGTH:
                sides.append(s)
    return sides


def build_side_graph(zones: Sequence[ConvexPolygon]) -> SideGraph:
    zones = tuple(zones)
    sides = zone_sides(zones)
    edges = []
    for i, j in itertools.combinations(range(len(sides)), 2):
        u, v = sides[i], sides[j]
        if u.zone_id == v.zone_id:
            edges.append((i, j, EdgeKind.INTRA, FULL_BOX))
            continue
        box = boundary_params(u, v, zones, classify_visibility(u, v, zones))
        if box is not None:
            edges.append((i, j, EdgeKind.INTER, box))
    return SideGraph(zones, sides, edges)


@dataclass
class PlanningGraph:
    """Nodes are [source, goal, *sides]; edges are undirected and expanded on demand."""

    SOURCE = 0
    GOAL = 1

    nodes: list[Side]
    edges: list[Edge]
    zones: tuple[ConvexPolygon, ...]
    scale: float = 1.0
    _lookup: dict = field(default=None, repr=False)

    @property
    def source(self) -> Point2D:
        return self.nodes[self.SOURCE].m

    @property
    def goal(self) -> Point2D:
        return self.nodes[self.GOAL].m

    def side_node_ids(self) -> list[int]:
        return list(range(2, len(self.nodes)))

    def directed_edges(self) -> list[DirectedEdge]:
        out = []
        for e in self.edges:
            for tail, head, box in ((e.u, e.v, e.params), (e.v, e.u, e.params.swapped())):
                if head == self.SOURCE or tail == self.GOAL:
                    continue
                out.append(DirectedEdge(tail, head, e.kind, box))
        return out

    def arc(self, tail: int, head: int) -> DirectedEdge | None:
        if self._lookup is None:
            self._lookup = {(d.tail, d.head): d for d in self.directed_edges()}
        return self._lookup.get((tail, head))

    def intra_count(self) -> int:
        return sum(e.kind is EdgeKind.INTRA for e in self.edges)


def terminal_boxes(p: Point2D, sides: list[Side], zones) -> list[tuple[int, BoundaryParams]]:
    term = Side.terminal(p)
    out = []
    for k, side in enumerate(sides):
        box = boundary_params(term, side, zones, classify_visibility(term, side, zones))
        if box is not None:
            out.append((k, box))
    return out


def _terminal_edges(node_id: int, p: Point2D, sides: list[Side], zones, cache: dict | None) -> list[Edge]:
    if cache is None:
        boxes = terminal_boxes(p, sides, zones)
    else:
        if p not in cache:
            cache[p] = terminal_boxes(p, sides, zones)
        boxes = cache[p]
    return [Edge(node_id, k + 2, EdgeKind.INTER, box) for k, box in boxes]


def build_graph(m: QuietZoneMap, s=None, g=None, side_graph: SideGraph | None = None,
                terminal_cache: dict | None = None) -> PlanningGraph:
    """Planning graph for travel s -> g over the zones of ``m`` (defaults: map source/goal).

    ``terminal_cache`` maps points to their visible side boxes and may be shared
    between calls on the same side graph.
    """
    s = as_point(m.source if s is None else s)
    g = as_point(m.goal if g is None else g)
    if s == g:
        raise ValidationError("source and goal coincide")
    check_terminal(s, m.zones, "source")
    check_terminal(g, m.zones, "goal")
    if side_graph is None:
        side_graph = build_side_graph(m.zones)
    sides = side_graph.sides
    nodes = [Side.terminal(s, 0), Side.terminal(g, 1)] + sides
    edges = [Edge(i + 2, j + 2, kind, box) for i, j, kind, box in side_graph.edges]
    edges += _terminal_edges(PlanningGraph.SOURCE, s, sides, m.zones, terminal_cache)
    edges += _terminal_edges(PlanningGraph.GOAL, g, sides, m.zones, terminal_cache)
    if not segment_blocked(s, g, m.zones):
        edges.append(Edge(PlanningGraph.SOURCE, PlanningGraph.GOAL, EdgeKind.INTER,
                          BoundaryParams(0.0, 0.0, 0.0, 0.0)))
    return PlanningGraph(nodes=nodes, edges=edges, zones=tuple(m.zones), scale=m.scale)
