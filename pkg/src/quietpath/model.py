"""The mixed-integer conic program for min-fuel paths, in SCS-style standard form.

Standard form::

    minimize    c @ x
    subject to  A @ x + s = b,   s in K = {0}^z x R+^l x SOC(q_1) x ... x SOC(q_k)

Per directed edge (u, v) the columns are the edge flags y, the perspective SOC
variables a = q_exit(u) * y and a2 = q_entry(v) * y, the perspective lambdas
c, c2, the perspective travelled distance l and (inter-zone edges only) the
fuel distance b. Per side node: w, e (fuel along the side), f (distance along
the side), S and S_abs. Intra-zone edges carry no b column: they are
electric only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DecodeError, InfeasibleError, ValidationError
from .geometry import Point2D, point_on_side
from .graph import DirectedEdge, EdgeKind, EnergyParams, PlanningGraph

FEAS_TOL = 1e-6
INT_TOL = 1e-5


@dataclass
class ConeDims:
    z: int = 0
    l: int = 0
    q: list[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.z + self.l + sum(self.q)

    def as_scs(self) -> dict:
        return {"z": self.z, "l": self.l, "q": list(self.q)}


@dataclass
class ConicModel:
    c: np.ndarray
    A: sp.csc_matrix
    b: np.ndarray
    cones: ConeDims
    binaries: np.ndarray          # columns that must be integral (empty when relaxed)
    bound_cols: np.ndarray        # columns with explicit [lo, hi] bound rows
    lo_rows: np.ndarray           # row of "-x <= -lo" for each bound column
    hi_rows: np.ndarray           # row of " x <=  hi"
    lo: np.ndarray
    hi: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def rhs_with_bounds(self, lo=None, hi=None) -> np.ndarray:
        """b with bound rows rewritten; ``lo``/``hi`` align with ``bound_cols``."""
        b = self.b.copy()
        b[self.lo_rows] = -(self.lo if lo is None else lo)
        b[self.hi_rows] = self.hi if hi is None else hi
        return b


@dataclass
class VarIndex:
    """Column map of a ConicModel back to the formulation's symbols."""

    edges: list[DirectedEdge]
    y: np.ndarray
    a: np.ndarray
    a2: np.ndarray
    b: np.ndarray      # -1 on intra-zone edges
    l: np.ndarray
    c: np.ndarray
    c2: np.ndarray
    side_nodes: list[int]
    w: np.ndarray
    e: np.ndarray
    f: np.ndarray
    S: np.ndarray
    S_abs: np.ndarray
    params: EnergyParams
    n_cols: int
    bound_cols: np.ndarray = None

    def edge_position(self) -> dict[tuple[int, int], int]:
        return {(d.tail, d.head): k for k, d in enumerate(self.edges)}

    def side_position(self) -> dict[int, int]:
        return {v: k for k, v in enumerate(self.side_nodes)}


class _RowBuilder:
    def __init__(self):
        self.zero: list[tuple[dict, float]] = []
        self.nonneg: list[tuple[dict, float]] = []
        self.soc: list[list[tuple[dict, float]]] = []

    # expressions are {col: coef}; rows are stored as (A-row, b) with A x + s = b

    def eq(self, expr: dict, rhs: float) -> int:
        self.zero.append((expr, rhs))
        return len(self.zero) - 1

    def ge(self, expr: dict, rhs: float = 0.0) -> int:
        """expr >= rhs."""
        self.nonneg.append(({k: -v for k, v in expr.items()}, -rhs))
        return len(self.nonneg) - 1

    def le(self, expr: dict, rhs: float) -> int:
        self.nonneg.append((expr, rhs))
        return len(self.nonneg) - 1

    def cone(self, exprs: list[dict]) -> None:
        """exprs[0] >= || exprs[1:] ||, each expr linear with zero constant."""
        self.soc.append([({k: -v for k, v in ex.items()}, 0.0) for ex in exprs])

    def assemble(self, n: int):
        rows, cols, vals, rhs = [], [], [], []
        r = 0
        blocks = [self.zero, self.nonneg] + self.soc
        for block in blocks:
            for expr, val in block:
                for k, v in expr.items():
                    if v != 0.0:
                        rows.append(r)
                        cols.append(k)
                        vals.append(v)
                rhs.append(val)
                r += 1
        A = sp.csc_matrix((vals, (rows, cols)), shape=(r, n))
        A.sum_duplicates()
        cones = ConeDims(len(self.zero), len(self.nonneg), [len(b) for b in self.soc])
        return A, np.asarray(rhs, dtype=float), cones


def _add(expr: dict, col: int, coef: float) -> None:
    expr[col] = expr.get(col, 0.0) + coef


def _assemble(graph: PlanningGraph, params: EnergyParams, arcs: Sequence[DirectedEdge],
              side_nodes: Sequence[int], relaxed: bool, fixed_ones: bool):
    al, be = params.alpha, params.beta
    ne = len(arcs)
    col = 0

    def alloc(k):
        nonlocal col
        out = np.arange(col, col + k)
        col += k
        return out

    y, a, a2, l, c, c2 = (alloc(ne) for _ in range(6))
    inter = np.array([d.kind is EdgeKind.INTER for d in arcs], dtype=bool)
    b = np.full(ne, -1, dtype=int)
    b[inter] = alloc(int(inter.sum()))
    ns = len(side_nodes)
    w, e, f, S, S_abs = (alloc(ns) for _ in range(5))
    n = col

    rb = _RowBuilder()
    lo_rows, hi_rows, bound_cols = [], [], []

    def bounded(j):
        bound_cols.append(j)
        lo_rows.append(rb.ge({j: 1.0}, 0.0))
        hi_rows.append(rb.le({j: 1.0}, 1.0))

    out_arcs: dict[int, list[int]] = {}
    in_arcs: dict[int, list[int]] = {}
    for k, d in enumerate(arcs):
        out_arcs.setdefault(d.tail, []).append(k)
        in_arcs.setdefault(d.head, []).append(k)
        nu, nv = graph.nodes[d.tail], graph.nodes[d.head]
        box = d.params
        # SOC transfer along the edge
        if inter[k]:
            rb.eq({a2[k]: 1.0, a[k]: -1.0, b[k]: -(al + be), l[k]: al}, 0.0)
            rb.ge({b[k]: 1.0})
            rb.ge({l[k]: 1.0, b[k]: -1.0})
        else:
            rb.eq({a2[k]: 1.0, a[k]: -1.0, l[k]: al}, 0.0)
        for col_, lo, hi in ((a[k], params.q_min, params.q_max), (a2[k], params.q_min, params.q_max),
                             (c[k], box.lo_u, box.hi_u), (c2[k], box.lo_v, box.hi_v)):
            rb.ge({col_: 1.0, y[k]: -lo})
            rb.le({col_: 1.0, y[k]: -hi}, 0.0)
        bounded(y[k])
        # l >= || n_u y + c (m_u - n_u) - n_v y - c2 (m_v - n_v) ||
        exprs = [{l[k]: 1.0}]
        for ax in (0, 1):
            ex: dict = {}
            _add(ex, y[k], nu.n[ax] - nv.n[ax])
            _add(ex, c[k], nu.m[ax] - nu.n[ax])
            _add(ex, c2[k], -(nv.m[ax] - nv.n[ax]))
            exprs.append(ex)
        rb.cone(exprs)

    for k, v in enumerate(side_nodes):
        side = graph.nodes[v]
        length = side.length
        outs, ins = out_arcs.get(v, []), in_arcs.get(v, [])
        bounded(w[k])
        rb.ge({e[k]: 1.0})
        rb.ge({f[k]: 1.0, e[k]: -1.0})
        rb.ge({w[k]: length, f[k]: -1.0})
        # SOC change along the side: exit - entry = beta*e - alpha*(f - e)
        bal = {e[k]: -(al + be), f[k]: al}
        for j in outs:
            _add(bal, a[j], 1.0)
        for j in ins:
            _add(bal, a2[j], -1.0)
        rb.eq(bal, 0.0)
        # S = entry lambda - exit lambda; |S| <= S_abs = f / length
        sdef = {S[k]: 1.0}
        for j in ins:
            _add(sdef, c2[j], -1.0)
        for j in outs:
            _add(sdef, c[j], 1.0)
        rb.eq(sdef, 0.0)
        rb.ge({S_abs[k]: 1.0, S[k]: -1.0})
        rb.ge({S_abs[k]: 1.0, S[k]: 1.0})
        rb.ge({S_abs[k]: 1.0})
        rb.eq({S_abs[k]: 1.0, f[k]: -1.0 / length}, 0.0)
        # degree: in == out <= w
        flow: dict = {}
        for j in ins:
            _add(flow, y[j], 1.0)
        for j in outs:
            _add(flow, y[j], -1.0)
        if flow:
            rb.eq(flow, 0.0)
        deg = {w[k]: 1.0}
        for j in outs:
            _add(deg, y[j], -1.0)
        rb.ge(deg)

    src_out = out_arcs.get(PlanningGraph.SOURCE, [])
    goal_in = in_arcs.get(PlanningGraph.GOAL, [])
    rb.eq({y[j]: 1.0 for j in src_out}, 1.0)
    rb.eq({y[j]: 1.0 for j in goal_in}, 1.0)
    rb.eq({a[j]: 1.0 for j in src_out}, params.q_init)
    rb.ge({a2[j]: 1.0 for j in goal_in}, params.q_goal_min)
    rb.le({a2[j]: 1.0 for j in goal_in}, params.q_goal_max)

    A, rhs, cones = rb.assemble(n)
    lo_rows = np.asarray(lo_rows, dtype=int) + cones.z
    hi_rows = np.asarray(hi_rows, dtype=int) + cones.z
    bound_cols = np.asarray(bound_cols, dtype=int)
    lo = np.zeros(len(bound_cols))
    hi = np.ones(len(bound_cols))
    if fixed_ones:
        lo[:] = 1.0
    rhs[lo_rows] = -lo
    rhs[hi_rows] = hi

    cvec = np.zeros(n)
    cvec[b[inter]] = 1.0
    cvec[e] = 1.0

    model = ConicModel(
        c=cvec, A=A, b=rhs, cones=cones,
        binaries=np.zeros(0, dtype=int) if (relaxed or fixed_ones) else bound_cols.copy(),
        bound_cols=bound_cols, lo_rows=lo_rows, hi_rows=hi_rows, lo=lo, hi=hi,
    )
    index = VarIndex(edges=list(arcs), y=y, a=a, a2=a2, b=b, l=l, c=c, c2=c2,
                     side_nodes=list(side_nodes), w=w, e=e, f=f, S=S, S_abs=S_abs,
                     params=params, n_cols=n, bound_cols=bound_cols)
    return model, index


def build_rmicp(graph: PlanningGraph, params: EnergyParams, relaxed: bool = False):
    """Full model over every directed edge of ``graph``; binaries relaxed to [0,1] on request.

    ``params`` must be expressed in the graph's (scaled) units.
    """
    return _assemble(graph, params, graph.directed_edges(), graph.side_node_ids(),
                     relaxed=relaxed, fixed_ones=False)


def check_node_sequence(graph: PlanningGraph, seq: Sequence[int]) -> list[DirectedEdge]:
    seq = list(seq)
    if len(seq) < 2 or seq[0] != PlanningGraph.SOURCE or seq[-1] != PlanningGraph.GOAL:
        raise ValidationError("node sequence must run from source to goal")
    if len(set(seq)) != len(seq):
        raise ValidationError("node sequence is not simple")
    arcs = []
    for u, v in zip(seq, seq[1:]):
        d = graph.arc(u, v)
        if d is None:
            raise ValidationError(f"no edge {u} -> {v} in the planning graph")
        arcs.append(d)
    return arcs


def build_fixed_path_restriction(graph: PlanningGraph, params: EnergyParams, node_sequence):
    """Continuous model with the path's y and w fixed to one.

    Edges and sides off the path would be forced to zero anyway, so they are
    simply left out of the model.
    """
    arcs = check_node_sequence(graph, node_sequence)
    return _assemble(graph, params, arcs, list(node_sequence[1:-1]), relaxed=True, fixed_ones=True)


# --------------------------------------------------------------------------
# decoding


@dataclass
class TravelSegment:
    start: Point2D
    end: Point2D
    length: float
    fuel: float
    kind: str            # "inter", "intra" or "side"
    mode: str            # "electric", "fuel", "electric_first", "fuel_first", "interleaved"
    node_from: int
    node_to: int
    q_start: float
    q_end: float

    @property
    def switch_point(self) -> Point2D | None:
        if self.mode not in ("electric_first", "fuel_first") or self.length <= 0:
            return None
        first = self.length - self.fuel if self.mode == "electric_first" else self.fuel
        if self.kind != "intra" and self.length > math.dist(self.start, self.end) + 1e-9:
            return None
        t = first / self.length
        return Point2D(self.start.x + t * (self.end.x - self.start.x),
                       self.start.y + t * (self.end.y - self.start.y))

    def as_dict(self) -> dict:
        return {"start": list(self.start), "end": list(self.end), "length": self.length,
                "fuel": self.fuel, "kind": self.kind, "mode": self.mode,
                "q_start": self.q_start, "q_end": self.q_end}


@dataclass
class PathSolution:
    """A decoded plan in unscaled units."""

    node_sequence: list[int]
    lam_entry: list[float | None]
    lam_exit: list[float | None]
    q_entry: list[float]
    q_exit: list[float]
    edge_length: list[float]
    edge_fuel: list[float]
    side_length: list[float]
    side_fuel: list[float]
    segments: list[TravelSegment]
    objective: float
    q_start: float
    q_goal_min: float
    q_goal_max: float
    scale: float = 1.0
    model_objective: float | None = None

    @property
    def q_final(self) -> float:
        return self.q_entry[-1]

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.segments)

    @property
    def switch_points(self) -> list[Point2D]:
        pts = []
        prev_fuel = None
        for seg in self.segments:
            if seg.length <= 0:
                continue
            sp_ = seg.switch_point
            if sp_ is not None:
                pts.append(sp_)
            first_fuel = seg.mode in ("fuel", "fuel_first", "interleaved")
            if prev_fuel is not None and prev_fuel != first_fuel:
                pts.append(seg.start)
            prev_fuel = seg.mode in ("fuel", "electric_first", "interleaved")
        return pts

    def waypoints(self) -> list[Point2D]:
        pts = [self.segments[0].start] if self.segments else []
        for seg in self.segments:
            if seg.end != pts[-1]:
                pts.append(seg.end)
        return pts

    def as_dict(self) -> dict:
        return {
            "node_sequence": self.node_sequence,
            "objective": self.objective,
            "model_objective": self.model_objective,
            "q_start": self.q_start,
            "q_final": self.q_final,
            "scale": self.scale,
            "lam_entry": self.lam_entry,
            "lam_exit": self.lam_exit,
            "q_entry": self.q_entry,
            "q_exit": self.q_exit,
            "edge_length": self.edge_length,
            "edge_fuel": self.edge_fuel,
            "side_length": self.side_length,
            "side_fuel": self.side_fuel,
            "segments": [s.as_dict() for s in self.segments],
            "switch_points": [list(p) for p in self.switch_points],
        }


def schedule_fuel(lengths, fuel_allowed, q0: float, params: EnergyParams,
                  q_goal_min: float | None = None, q_goal_max: float | None = None):
    """Minimum total fuel for a fixed sequence of legs; returns per-leg fuel.

    SOC after leg k is q0 - alpha*sum(L) + (alpha+beta)*Z_k with Z_k the
    cumulative fuel, so every SOC bound is a bound on Z_k. Fuel is taken as
    late as possible, which is optimal for all upper bounds at once.
    Raises InfeasibleError when no schedule exists.
    """
    al, be = params.alpha, params.beta
    gmin = params.q_goal_min if q_goal_min is None else q_goal_min
    gmax = params.q_goal_max if q_goal_max is None else q_goal_max
    L = np.asarray(lengths, dtype=float)
    cap_leg = np.where(np.asarray(fuel_allowed, dtype=bool), L, 0.0)
    csum = np.cumsum(L)
    k = al + be
    need = (params.q_min - q0 + al * csum) / k
    cap = (params.q_max - q0 + al * csum) / k
    if len(L):
        need[-1] = max(need[-1], (gmin - q0 + al * csum[-1]) / k)
        cap[-1] = min(cap[-1], (gmax - q0 + al * csum[-1]) / k)
    if q0 < params.q_min - FEAS_TOL or q0 > params.q_max + FEAS_TOL:
        raise InfeasibleError("initial SOC out of bounds")
    lb = need.copy()
    for i in range(len(L) - 2, -1, -1):
        lb[i] = max(lb[i], lb[i + 1] - cap_leg[i + 1])
    if len(L) and lb[0] - cap_leg[0] > FEAS_TOL:
        raise InfeasibleError("not enough fuel capacity early in the path")
    Z = np.zeros(len(L))
    prev = 0.0
    for i in range(len(L)):
        z_i = min(max(prev, lb[i]), prev + cap_leg[i])
        if z_i > cap[i] + FEAS_TOL or z_i < lb[i] - FEAS_TOL:
            raise InfeasibleError(f"SOC bounds cannot be met on leg {i}")
        Z[i] = z_i
        prev = z_i
    fuel = np.diff(np.concatenate([[0.0], Z]))
    return np.clip(fuel, 0.0, cap_leg)


def _segment_mode(L: float, z: float, q0: float, params: EnergyParams) -> str:
    if L <= 1e-12 or z <= 1e-12 * max(L, 1.0):
        return "electric"
    if z >= L - 1e-12 * max(L, 1.0):
        return "fuel"
    if q0 - params.alpha * (L - z) >= params.q_min - FEAS_TOL:
        return "electric_first"
    if q0 + params.beta * z <= params.q_max + FEAS_TOL:
        return "fuel_first"
    return "interleaved"


def path_from_geometry(graph: PlanningGraph, params: EnergyParams, seq: list[int],
                       lam_entry: list, lam_exit: list, side_dist: list,
                       model_objective: float | None = None, edge_dist: list | None = None) -> PathSolution:
    """Schedule fuel exactly on a fixed geometric path and express it in unscaled units.

    ``params``, ``side_dist`` and ``edge_dist`` are in the graph's scaled units.
    Inter edges are flown along their chord; when the chord alone cannot meet
    the SOC bounds (e.g. a high arrival SOC) and the model travelled further
    (``edge_dist``), the extra distance is flown back and forth on the chord.
    """
    gamma = graph.scale
    up = params.scaled(1.0 / gamma)  # unscaled rates
    pts_in, pts_out = [], []
    for i, v in enumerate(seq):
        node = graph.nodes[v]
        pin = node.m if lam_entry[i] is None else point_on_side(node, lam_entry[i])
        pout = node.m if lam_exit[i] is None else point_on_side(node, lam_exit[i])
        pts_in.append(Point2D(pin.x / gamma, pin.y / gamma))
        pts_out.append(Point2D(pout.x / gamma, pout.y / gamma))

    legs = []  # (start, end, length, allowed, kind, from, to)
    for i, v in enumerate(seq):
        if 0 < i < len(seq) - 1:
            d = max(side_dist[i] / gamma, math.dist(pts_in[i], pts_out[i]))
            legs.append((pts_in[i], pts_out[i], d, True, "side", v, v))
        if i + 1 < len(seq):
            arc = graph.arc(v, seq[i + 1])
            kind = "inter" if arc.kind is EdgeKind.INTER else "intra"
            legs.append((pts_out[i], pts_in[i + 1], math.dist(pts_out[i], pts_in[i + 1]),
                         kind == "inter", kind, v, seq[i + 1]))

    try:
        fuel = schedule_fuel([g[2] for g in legs], [g[3] for g in legs], up.q_init, up)
    except InfeasibleError as exc:
        fuel, err = None, exc
    target = None if model_objective is None else model_objective / gamma
    if edge_dist is not None and (fuel is None or (target is not None and fuel.sum() > target + 1e-7 * max(1.0, target))):
        longer = _with_edge_dist(legs, edge_dist, gamma)
        try:
            alt = schedule_fuel([g[2] for g in longer], [g[3] for g in longer], up.q_init, up)
            if fuel is None or alt.sum() < fuel.sum():
                legs, fuel = longer, alt
        except InfeasibleError:
            pass
    if fuel is None:
        raise DecodeError(f"decoded geometry admits no SOC schedule: {err}")

    segments = []
    q = up.q_init
    for (a_, b_, L, allowed, kind, fr, to), z in zip(legs, fuel):
        q_end = q + up.beta * z - up.alpha * (L - z)
        q_end = float(q_end)
        segments.append(TravelSegment(a_, b_, float(L), float(z), kind, _segment_mode(L, z, q, up),
                                      fr, to, q, q_end))
        q = q_end

    q_entry, q_exit = [up.q_init], [up.q_init]
    edge_len, edge_fuel, side_len, side_fuel = [], [], [0.0], [0.0]
    for seg in segments:
        if seg.kind == "side":
            side_len.append(seg.length)
            side_fuel.append(seg.fuel)
            q_exit[-1] = seg.q_end
        else:
            edge_len.append(seg.length)
            edge_fuel.append(seg.fuel)
            q_entry.append(seg.q_end)
            q_exit.append(seg.q_end)
            if len(side_len) < len(q_entry):
                side_len.append(0.0)
                side_fuel.append(0.0)
    return PathSolution(
        node_sequence=list(seq),
        lam_entry=list(lam_entry), lam_exit=list(lam_exit),
        q_entry=q_entry, q_exit=q_exit,
        edge_length=edge_len, edge_fuel=edge_fuel,
        side_length=side_len, side_fuel=side_fuel,
        segments=segments,
        objective=float(sum(fuel)),
        q_start=up.q_init, q_goal_min=up.q_goal_min, q_goal_max=up.q_goal_max,
        scale=gamma,
        model_objective=None if model_objective is None else model_objective / gamma,
    )


def _with_edge_dist(legs, edge_dist, gamma):
    out, k = [], 0
    for leg in legs:
        if leg[4] == "side":
            out.append(leg)
            continue
        L = leg[2]
        if leg[4] == "inter":
            L = max(L, edge_dist[k] / gamma)
        out.append((leg[0], leg[1], L, *leg[3:]))
        k += 1
    return out


def active_path(index: VarIndex, x: np.ndarray, int_tol: float = INT_TOL) -> list[int]:
    """Follow y = 1 edges from source to goal. Stray zero-cost cycles are ignored."""
    yv = x[index.y]
    frac = np.abs(yv - np.round(yv))
    if len(yv) and frac.max() > int_tol:
        raise DecodeError("edge variables are not integral")
    out: dict[int, list[int]] = {}
    for k, d in enumerate(index.edges):
        if yv[k] > 0.5:
            out.setdefault(d.tail, []).append(k)
    seq = [PlanningGraph.SOURCE]
    seen = {PlanningGraph.SOURCE}
    while seq[-1] != PlanningGraph.GOAL:
        nxt = out.get(seq[-1], [])
        if len(nxt) != 1:
            raise DecodeError(f"node {seq[-1]} has {len(nxt)} active out-edges")
        v = index.edges[nxt[0]].head
        if v in seen:
            raise DecodeError("active edges revisit a node")
        seen.add(v)
        seq.append(v)
    return seq


def decode_solution(index: VarIndex, x: np.ndarray, graph: PlanningGraph,
                    gamma: float | None = None) -> PathSolution:
    """Turn an integral solution vector into a PathSolution in unscaled units.

    Lambdas are read as c / y; the fuel schedule is then recomputed exactly on
    the decoded geometry so the plan certifies without solver round-off.
    """
    if gamma is not None and not math.isclose(gamma, graph.scale):
        raise ValidationError("gamma disagrees with the graph's scale")
    seq = active_path(index, x)
    epos = index.edge_position()
    spos = index.side_position()
    lam_entry: list = [None] * len(seq)
    lam_exit: list = [None] * len(seq)
    side_dist = [0.0] * len(seq)
    edge_dist = []
    for i, (u, v) in enumerate(zip(seq, seq[1:])):
        k = epos[(u, v)]
        box = index.edges[k].params
        yk = max(x[index.y[k]], 1e-12)
        edge_dist.append(float(x[index.l[k]] / yk))
        if not graph.nodes[u].is_terminal:
            lam_exit[i] = float(np.clip(x[index.c[k]] / yk, box.lo_u, box.hi_u))
        if not graph.nodes[v].is_terminal:
            lam_entry[i + 1] = float(np.clip(x[index.c2[k]] / yk, box.lo_v, box.hi_v))
    for i, v in enumerate(seq[1:-1], start=1):
        j = spos[v]
        wv = max(x[index.w[j]], 1e-12)
        side_dist[i] = float(min(max(x[index.f[j]] / wv, 0.0), graph.nodes[v].length))
    model_obj = float(index_objective(index, x))
    return path_from_geometry(graph, index.params, seq, lam_entry, lam_exit, side_dist, model_obj, edge_dist)


def index_objective(index: VarIndex, x: np.ndarray) -> float:
    bcols = index.b[index.b >= 0]
    return float(x[bcols].sum() + x[index.e].sum())


# --------------------------------------------------------------------------
# text export


def export_model(model: ConicModel, path) -> None:
    """Write the model as a line-oriented sparse text file.

    Layout::

        quietpath-conic 1
        size <m> <n>
        cones <z> <l> <k> q_1 ... q_k
        binaries <count> j_1 ... j_count
        bounds <count>             followed by <count> lines: col lo_row hi_row lo hi
        c <nnz>                    followed by <nnz> lines: col value
        b <nnz>                    followed by <nnz> lines: row value
        A <nnz>                    followed by <nnz> lines: row col value
    """
    A = model.A.tocoo()
    with open(path, "w") as fh:
        fh.write("quietpath-conic 1\n")
        fh.write(f"size {model.m} {model.n}\n")
        q = model.cones.q
        fh.write(f"cones {model.cones.z} {model.cones.l} {len(q)} {' '.join(map(str, q))}\n".rstrip() + "\n")
        fh.write(f"binaries {len(model.binaries)} {' '.join(map(str, model.binaries))}".rstrip() + "\n")
        fh.write(f"bounds {len(model.bound_cols)}\n")
        for j, r0, r1, lo, hi in zip(model.bound_cols, model.lo_rows, model.hi_rows, model.lo, model.hi):
            fh.write(f"{j} {r0} {r1} {float(lo)!r} {float(hi)!r}\n")
        cnz = np.nonzero(model.c)[0]
        fh.write(f"c {len(cnz)}\n")
        for j in cnz:
            fh.write(f"{j} {float(model.c[j])!r}\n")
        bnz = np.nonzero(model.b)[0]
        fh.write(f"b {len(bnz)}\n")
        for i in bnz:
            fh.write(f"{i} {float(model.b[i])!r}\n")
        fh.write(f"A {A.nnz}\n")
        for i, j, v in zip(A.row, A.col, A.data):
            fh.write(f"{i} {j} {float(v)!r}\n")


def import_model(path) -> ConicModel:
    with open(path) as fh:
        lines = iter(fh.read().splitlines())
    head = next(lines).split()
    if head != ["quietpath-conic", "1"]:
        raise ValidationError("not a quietpath conic model file")
    _, m, n = next(lines).split()
    m, n = int(m), int(n)
    tok = next(lines).split()
    z, l, k = int(tok[1]), int(tok[2]), int(tok[3])
    q = [int(t) for t in tok[4:4 + k]]
    tok = next(lines).split()
    binaries = np.array([int(t) for t in tok[2:]], dtype=int)
    nb = int(next(lines).split()[1])
    rows = [next(lines).split() for _ in range(nb)]
    bound_cols = np.array([int(r[0]) for r in rows], dtype=int)
    lo_rows = np.array([int(r[1]) for r in rows], dtype=int)
    hi_rows = np.array([int(r[2]) for r in rows], dtype=int)
    lo = np.array([float(r[3]) for r in rows])
    hi = np.array([float(r[4]) for r in rows])
    c = np.zeros(n)
    for _ in range(int(next(lines).split()[1])):
        j, v = next(lines).split()
        c[int(j)] = float(v)
    b = np.zeros(m)
    for _ in range(int(next(lines).split()[1])):
        i, v = next(lines).split()
        b[int(i)] = float(v)
    nnz = int(next(lines).split()[1])
    trip = np.array([next(lines).split() for _ in range(nnz)], dtype=float).reshape(-1, 3)
    A = sp.csc_matrix((trip[:, 2], (trip[:, 0].astype(int), trip[:, 1].astype(int))), shape=(m, n))
    return ConicModel(c=c, A=A, b=b, cones=ConeDims(z, l, q), binaries=binaries,
                      bound_cols=bound_cols, lo_rows=lo_rows, hi_rows=hi_rows, lo=lo, hi=hi)
