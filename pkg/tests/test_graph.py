import itertools

import numpy as np
import pytest

from conftest import P, corpus_map, one_square_map, rel, square
from quietpath.errors import ValidationError
from quietpath.geometry import Point2D, Side, boundary_params, classify_visibility, point_on_side, segment_blocked
from quietpath.graph import (
    EdgeKind,
    EnergyParams,
    PlanningGraph,
    QuietZoneMap,
    build_graph,
    scale_map,
    zone_sides,
)
from quietpath.solver.bnb import solve_fixed_path


def test_scale_map_to_default_extent():
    m = QuietZoneMap.from_raw([], (0, 0), (12000, 8000))
    sm = scale_map(m, 100)
    assert sm.scale == pytest.approx(1 / 120)
    p = Point2D(1200 * sm.scale, 800 * sm.scale)
    assert p.x == pytest.approx(10) and p.y == pytest.approx(6.6667, abs=1e-4)
    assert sm.params.alpha == pytest.approx(9.6)
    # a 600-unit electric leg drains the same SOC before and after
    assert 600 * P.alpha == pytest.approx(600 * sm.scale * sm.params.alpha) == pytest.approx(48)


def test_scale_map_identity_when_small():
    m = QuietZoneMap.from_raw([square(10, 10, 5)], (0, 0), (50, 60))
    assert scale_map(m, 100) is m


def test_scale_map_rejects_zero_extent():
    m = QuietZoneMap(zones=(), source=Point2D(1, 1), goal=Point2D(1, 1))
    with pytest.raises(ValidationError):
        scale_map(m)


def test_energy_params_invariants():
    with pytest.raises(ValidationError):
        EnergyParams(alpha=0.0, beta=0.1, q_min=20, q_max=100, q_init=100)
    with pytest.raises(ValidationError):
        EnergyParams(alpha=0.1, beta=0.1, q_min=20, q_max=100, q_init=10)


def test_map_validation():
    with pytest.raises(ValidationError):
        QuietZoneMap.from_raw([square(0, 0, 1), square(1.5, 0, 1)], (-5, 0), (5, 0))
    with pytest.raises(ValidationError):
        QuietZoneMap.from_raw([square(0, 0, 1)], (0, 0), (5, 0))
    # a terminal on the boundary is accepted
    QuietZoneMap.from_raw([square(0, 0, 1)], (1, 0), (5, 0))


def test_empty_map_graph():
    g = build_graph(QuietZoneMap.from_raw([], (0, 0), (10, 0)))
    assert len(g.nodes) == 2
    assert len(g.edges) == 1
    e = g.edges[0]
    assert (e.u, e.v, e.kind) == (0, 1, EdgeKind.INTER)
    assert [(d.tail, d.head) for d in g.directed_edges()] == [(0, 1)]


def _expected_inter(nodes, zones):
    out = set()
    for i, j in itertools.combinations(range(len(nodes)), 2):
        u, v = nodes[i], nodes[j]
        if u.zone_id is not None and u.zone_id == v.zone_id:
            continue
        if {i, j} == {0, 1}:
            if not segment_blocked(u.m, v.m, zones):
                out.add((i, j))
            continue
        if boundary_params(u, v, zones, classify_visibility(u, v, zones)) is not None:
            out.add((i, j))
    return out


def test_one_square_counts_match_exhaustive_classification():
    m = one_square_map()
    g = build_graph(m)
    assert len(g.nodes) == 6
    assert g.intra_count() == 6
    inter = {(min(e.u, e.v), max(e.u, e.v)) for e in g.edges if e.kind is EdgeKind.INTER}
    assert inter == _expected_inter(g.nodes, m.zones)
    assert (0, 1) not in inter                       # the square blocks s-g


def test_not_visible_pair_absent():
    a, b = square(0, 0, 1), square(10, 0, 1)
    wall = square(5, 0, 3)
    m = QuietZoneMap.from_raw([a, b, wall], (0, 10), (10, 10))
    g = build_graph(m)
    ids = {(s.zone_id, s.side_index): k for k, s in enumerate(g.nodes) if s.zone_id is not None}
    ua = ids[(0, 1)]          # right edge of a
    vb = ids[(1, 3)]          # left edge of b
    assert classify_visibility(g.nodes[ua], g.nodes[vb], m.zones).value == "NotVisible"
    pairs = {frozenset((e.u, e.v)) for e in g.edges}
    assert frozenset((ua, vb)) not in pairs


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_graph_invariants_on_random_maps(seed):
    m = scale_map(corpus_map(seed))
    g = build_graph(m)
    ks = [len(z.vertices) for z in m.zones]
    assert len(g.nodes) == sum(ks) + 2
    assert g.intra_count() == sum(k * (k - 1) // 2 for k in ks)
    seen = set()
    for e in g.edges:
        key = frozenset((e.u, e.v))
        assert e.u != e.v and key not in seen
        seen.add(key)
        u, v = g.nodes[e.u], g.nodes[e.v]
        if e.kind is EdgeKind.INTRA:
            assert u.zone_id == v.zone_id
            continue
        box = e.params
        for lu in np.linspace(box.lo_u, box.hi_u, 7):
            for lv in np.linspace(box.lo_v, box.hi_v, 7):
                assert not segment_blocked(point_on_side(u, lu), point_on_side(v, lv), m.zones)


def test_fixed_path_cost_is_scale_invariant():
    m = one_square_map()
    costs = []
    for extent in (50, 100, 400):
        sm = scale_map(m, extent)
        g = build_graph(sm)
        # s -> bottom side of the square -> g
        bottom = next(k for k, s in enumerate(g.nodes) if s.zone_id == 0 and s.side_index == 0)
        plan = solve_fixed_path(g, sm.params, [PlanningGraph.SOURCE, bottom, PlanningGraph.GOAL])
        costs.append(plan.objective)
    assert costs[0] > 0
    assert rel(costs[1], costs[0]) < 1e-6 and rel(costs[2], costs[0]) < 1e-6


def test_terminal_is_degenerate_side():
    t = Side.terminal((3, 4))
    assert t.is_terminal and t.length == 0 and t.corners() == [Point2D(3, 4)]
    assert len(zone_sides([square(0, 0, 1)])) == 4
