import math

import numpy as np
import pytest

from conftest import P, empty_map, forced_fuel, one_square_map, small_map, square
from quietpath.discrete import (
    DiscreteConfig,
    build_discrete_graph,
    discrete_shortest_path,
    level_floor,
    sample_boundary,
    solve_discrete,
)
from quietpath.errors import ValidationError
from quietpath.graph import QuietZoneMap, build_graph, scale_map
from quietpath.solver.bnb import solve_exact
from quietpath.validate import certify


def _discrete(m, cfg=None):
    return solve_discrete(scale_map(m), cfg=cfg)


def test_config_validation():
    with pytest.raises(ValidationError):
        DiscreteConfig(soc_levels=1)
    with pytest.raises(ValidationError):
        DiscreteConfig(spacing=0)
    assert DiscreteConfig() == DiscreteConfig(10, 100.0)


def test_sampling_includes_vertices_and_nests():
    z = square(0, 0, 1)
    pts, owner = sample_boundary([z], 0.5)
    assert len(pts) == 16 and set(owner) == {0}
    for v in z.vertices:
        assert np.min(np.linalg.norm(pts - np.asarray(v), axis=1)) < 1e-12
    fine, _ = sample_boundary([z], 0.25)
    for p in pts:
        assert np.min(np.linalg.norm(fine - p, axis=1)) < 1e-12


def test_level_floor_rounds_down():
    lv = np.linspace(20, 100, 5)
    assert level_floor(lv, [19.0, 20.0, 39.9, 40.0, 100.0]).tolist() == [-1, 0, 0, 1, 4]


def test_empty_short_map_is_free():
    res = _discrete(empty_map(1000))
    assert res.cost == pytest.approx(0.0, abs=1e-9)
    assert res.trace.node_sequence[0] == 0


def test_forced_fuel_never_beats_continuous():
    res = _discrete(empty_map(2000))
    assert res.cost >= forced_fuel() - 1e-9
    # trace is un-quantized: it certifies with exact transitions
    certify(res.trace, P, [])


def test_zero_cost_chain_around_a_zone():
    m = QuietZoneMap.from_raw([square(300, 0, 100)], (0, 0), (600, 0))
    res = _discrete(m, DiscreteConfig(10, 50))
    assert res.cost == pytest.approx(0.0, abs=1e-9)
    certify(res.trace, P, m.zones)


def test_unreachable_goal_is_infinite():
    p = P.with_soc(q_init=20.0, q_goal_min=100.0)
    res = _discrete(empty_map(100, p))
    assert math.isinf(res.cost) and res.trace is None


def test_fine_grid_matches_exact_on_one_zone():
    m = one_square_map()
    sm = scale_map(m)
    exact = solve_exact(build_graph(sm), sm.params).objective
    fine = solve_discrete(sm, cfg=DiscreteConfig(50, 2 / sm.scale))
    assert exact > 0
    assert exact * (1 - 0.01) <= fine.cost <= exact * 1.03
    certify(fine.trace, m.params, m.zones)


@pytest.mark.parametrize("seed", range(10))
def test_refinement_never_increases_cost(seed):
    m = scale_map(small_map(seed, 2))
    costs = []
    for k, spacing in ((10, 100.0), (19, 50.0), (37, 25.0)):
        costs.append(solve_discrete(m, cfg=DiscreteConfig(k, spacing)).cost)
    assert costs[1] <= costs[0] + 1e-9 * max(1.0, costs[0])
    assert costs[2] <= costs[1] + 1e-9 * max(1.0, costs[1])


def test_graph_structure():
    m = scale_map(one_square_map())
    dg = build_discrete_graph(m, cfg=DiscreteConfig(10, 100))
    assert dg.n_states == len(dg.points) * 10
    assert (dg.zone_of[:2] == -1).all()
    # arcs are symmetric
    pairs = {(p, int(q)) for p, (t, _, _) in enumerate(dg.nbr) for q in t}
    assert all((q, p) in pairs for p, q in pairs)
    res = discrete_shortest_path(dg)
    assert res.feasible and res.search_time >= 0
