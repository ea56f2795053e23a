from dataclasses import replace

import networkx as nx
import numpy as np
import pytest

from conftest import P, empty_map, forced_fuel, one_square_map, small_map, two_zone_map
from quietpath.errors import InfeasibleError, ValidationError
from quietpath.graph import PlanningGraph, build_graph, scale_map
from quietpath.model import (
    build_fixed_path_restriction,
    build_rmicp,
    decode_solution,
    export_model,
    import_model,
    index_objective,
    schedule_fuel,
)
from quietpath.solver.bnb import BnBConfig, solve_exact, solve_fixed_path, solve_relaxation
from quietpath.solver.conic import ConicConfig, solve_conic
from quietpath.validate import certify, simulate_soc

TIGHT = ConicConfig(eps_abs=1e-9, eps_rel=1e-9, backend="clarabel")


def _scaled(m):
    sm = scale_map(m)
    return sm, build_graph(sm)


def test_empty_map_model_shape_and_zero_cost():
    sm, g = _scaled(empty_map(800))
    model, idx = build_rmicp(g, sm.params)
    assert len(idx.y) == 1 and model.cones.q == [3]
    assert np.flatnonzero(model.c).tolist() == [int(idx.b[0])]
    sol = solve_conic(model, TIGHT)
    plan = decode_solution(idx, sol.x, g)
    assert plan.node_sequence == [0, 1]
    assert plan.objective == pytest.approx(0, abs=1e-9)
    assert plan.q_final == pytest.approx(100 - 0.08 * 800, abs=1e-6)


def test_forced_fuel_is_analytic():
    sm, g = _scaled(empty_map(2000))
    model, idx = build_rmicp(g, sm.params)
    plan = decode_solution(idx, solve_conic(model, TIGHT).x, g)
    assert forced_fuel() == pytest.approx(666.6667, abs=1e-3)
    assert plan.objective == pytest.approx(forced_fuel(), abs=1e-6 * 666.67)
    assert plan.q_final == pytest.approx(20, abs=1e-6)
    assert plan.model_objective == pytest.approx(forced_fuel(), rel=1e-6)


def test_sequence_must_exist():
    sm, g = _scaled(one_square_map())
    with pytest.raises(ValidationError):
        build_fixed_path_restriction(g, sm.params, [0, 1])      # s-g is blocked
    with pytest.raises(ValidationError):
        build_fixed_path_restriction(g, sm.params, [0, 2, 2, 1])


def _simple_paths(g, cutoff=5):
    G = nx.DiGraph([(d.tail, d.head) for d in g.directed_edges()])
    return [p for p in nx.all_simple_paths(G, PlanningGraph.SOURCE, PlanningGraph.GOAL, cutoff=cutoff)]


def test_enumeration_matches_exact_and_restriction_properties():
    sm, g = _scaled(two_zone_map())
    plans = [solve_fixed_path(g, sm.params, p) for p in _simple_paths(g)]
    costs = [p.objective for p in plans if p is not None]
    best = min(costs)
    res = solve_exact(g, sm.params, BnBConfig(gap=1e-7))
    assert res.objective == pytest.approx(best, rel=1e-6)
    # restriction of the optimum is the optimum; detours never beat it
    again = solve_fixed_path(g, sm.params, res.incumbent.node_sequence)
    assert again.objective == pytest.approx(res.objective, rel=1e-6)
    assert all(c >= res.objective - 1e-6 * res.objective for c in costs)
    # and the relaxation sits below
    bound, _ = solve_relaxation(g, sm.params)
    assert bound <= res.objective * (1 + 1e-6)


def _fix_to_path(model, idx, g, seq):
    """Full-model bounds pinning y/w to one path."""
    lo, hi = model.lo.copy(), model.hi.copy()
    pos = {int(c): i for i, c in enumerate(model.bound_cols)}
    on = {(u, v) for u, v in zip(seq, seq[1:])}
    for k, d in enumerate(idx.edges):
        lo[pos[int(idx.y[k])]] = hi[pos[int(idx.y[k])]] = float((d.tail, d.head) in on)
    for j, v in enumerate(idx.side_nodes):
        lo[pos[int(idx.w[j])]] = hi[pos[int(idx.w[j])]] = float(v in seq)
    return model.rhs_with_bounds(lo, hi)


def test_substitution_and_balance_on_integral_solution():
    sm, g = _scaled(two_zone_map())
    p = sm.params
    seq = solve_exact(g, p, BnBConfig(gap=1e-7)).incumbent.node_sequence
    model, idx = build_rmicp(g, p)
    model.b = _fix_to_path(model, idx, g, seq)
    x = solve_conic(model, TIGHT).x
    plan = decode_solution(idx, x, g)
    assert plan.node_sequence == seq
    assert index_objective(idx, x) / g.scale == pytest.approx(plan.objective, rel=1e-6)
    # replay SOC from raw columns: edges move q by -alpha*l + (alpha+beta)*b,
    # sides by beta*e - alpha*(f - e)
    epos, spos = idx.edge_position(), idx.side_position()
    q = p.q_init
    for i, (u, v) in enumerate(zip(seq, seq[1:])):
        k = epos[(u, v)]
        if i > 0:
            j = spos[u]
            e, f = x[idx.e[j]], x[idx.f[j]]
            q += p.beta * e - p.alpha * (f - e)
        assert x[idx.a[k]] == pytest.approx(q, abs=1e-6)
        bk = x[idx.b[k]] if idx.b[k] >= 0 else 0.0
        q += -p.alpha * x[idx.l[k]] + (p.alpha + p.beta) * bk
        assert x[idx.a2[k]] == pytest.approx(q, abs=1e-6)
        assert x[idx.y[k]] == pytest.approx(1.0, abs=1e-6)
        # cone tightness where fuel is used
        if bk > 1e-6:
            nu, nv = g.nodes[u], g.nodes[v]
            pu = np.asarray(nu.n) + x[idx.c[k]] * (np.asarray(nu.m) - np.asarray(nu.n))
            pv = np.asarray(nv.n) + x[idx.c2[k]] * (np.asarray(nv.m) - np.asarray(nv.n))
            assert x[idx.l[k]] == pytest.approx(np.linalg.norm(pu - pv), abs=1e-6)
    certify(plan, p.scaled(1 / g.scale), two_zone_map().zones)


def test_decoded_random_two_zone_plans_certify():
    for seed in range(3):
        m = small_map(seed, 2)
        sm, g = _scaled(m)
        res = solve_exact(g, sm.params)
        if res.incumbent is None:
            continue
        prof = simulate_soc(res.incumbent, m.params)
        assert prof.final == pytest.approx(res.incumbent.q_final, abs=1e-6)


@pytest.mark.parametrize("q_min,q_init", [(20, 100), (10, 100), (20, 90)])
def test_monotone_in_soc_window(q_min, q_init):
    base = P.with_soc()
    m = one_square_map(base)
    ref = solve_exact(_scaled(m)[1], scale_map(m).params, BnBConfig(gap=1e-7)).objective
    assert ref > 0
    p2 = replace(base, q_min=q_min, q_init=q_init, q_goal_min=q_min)
    m2 = one_square_map(p2)
    sm2, g2 = _scaled(m2)
    val = solve_exact(g2, sm2.params, BnBConfig(gap=1e-7)).objective
    if q_min <= 20 and q_init >= 100:
        assert val <= ref + 1e-6 * ref
    else:
        assert val >= ref - 1e-6 * ref


def test_export_roundtrip(tmp_path):
    sm, g = _scaled(one_square_map())
    model, _ = build_rmicp(g, sm.params)
    path = tmp_path / "m.txt"
    export_model(model, path)
    back = import_model(path)
    assert (back.A != model.A).nnz == 0
    assert np.array_equal(back.b, model.b) and np.array_equal(back.c, model.c)
    assert back.cones == model.cones
    assert np.array_equal(back.binaries, model.binaries)
    assert np.array_equal(back.lo_rows, model.lo_rows) and np.array_equal(back.hi, model.hi)
    a = solve_conic(model, TIGHT).objective
    b = solve_conic(back, TIGHT).objective
    assert a == pytest.approx(b, rel=1e-9)


def test_schedule_fuel_lazy_and_infeasible():
    p = P
    fuel = schedule_fuel([1000.0, 1000.0], [True, True], 100.0, p)
    # first leg drains to 20 exactly, second leg must make up the rest
    assert fuel[0] == pytest.approx(0.0, abs=1e-9)
    assert fuel.sum() == pytest.approx(forced_fuel(), rel=1e-9)
    with pytest.raises(InfeasibleError):
        schedule_fuel([500.0, 1500.0], [True, False], 100.0, p)   # 1500 electric needs 120 SOC


def test_intra_edge_is_electric_only():
    sm, g = _scaled(one_square_map())
    model, idx = build_rmicp(g, sm.params)
    intra = [k for k, d in enumerate(idx.edges) if d.kind.value == "Intra"]
    assert intra and all(idx.b[k] == -1 for k in intra)
