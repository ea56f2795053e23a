import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import one_square_map
from conic_reference import make_model, random_program, reference_solve
from quietpath.graph import build_graph, scale_map
from quietpath.model import ConeDims, build_rmicp
from quietpath.solver.conic import ConicConfig, Status, project_soc, solve_conic

NATIVE = ConicConfig(eps_abs=1e-9, eps_rel=1e-9, max_iters=200_000)


def test_nonnegative_one_dimensional():
    # minimize x  s.t.  x >= 1   (-x + s = -1, s >= 0)
    model = make_model([1.0], [[-1.0]], [-1.0], ConeDims(0, 1, []))
    sol = solve_conic(model)
    assert sol.status is Status.OPTIMAL
    assert sol.x[0] == pytest.approx(1.0, abs=1e-5)


def test_second_order_cone_norm():
    # minimize t  s.t.  x = (3, 4),  t >= ||x||
    A = [[0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    model = make_model([1, 0, 0], A, [3, 4, 0, 0, 0], ConeDims(2, 0, [3]))
    sol = solve_conic(model)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(5.0, abs=1e-5)


def test_infeasible_and_unbounded_certificates():
    # x >= 1 and x <= 0
    model = make_model([1.0], [[-1.0], [1.0]], [-1.0, 0.0], ConeDims(0, 2, []))
    assert solve_conic(model).status is Status.INFEASIBLE
    # minimize x  s.t.  x <= 1
    model = make_model([1.0], [[1.0]], [1.0], ConeDims(0, 1, []))
    assert solve_conic(model).status is Status.UNBOUNDED


def test_reference_agrees_on_trivial_case():
    A = [[0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    obj, _ = reference_solve(np.array([1.0, 0, 0]), A, np.array([3.0, 4, 0, 0, 0]), ConeDims(2, 0, [3]))
    assert obj == pytest.approx(5.0, abs=1e-8)


@pytest.mark.parametrize("seed", range(20))
def test_random_programs_match_dense_reference(seed):
    rng = np.random.default_rng(seed)
    c, A, b, cones = random_program(rng)
    ref, _ = reference_solve(c, A, b, cones)
    sol = solve_conic(make_model(c, A, b, cones), NATIVE)
    assert sol.status is Status.OPTIMAL
    assert abs(sol.objective - ref) <= 1e-5 * max(1.0, abs(ref))


@pytest.mark.parametrize("backend", ["scs", "clarabel"])
def test_backends_agree_on_relaxation(backend):
    sm = scale_map(one_square_map())
    model, _ = build_rmicp(build_graph(sm), sm.params, relaxed=True)
    ours = solve_conic(model, ConicConfig(eps_abs=1e-8, eps_rel=1e-8)).objective
    other = solve_conic(model, ConicConfig(eps_abs=1e-8, eps_rel=1e-8, backend=backend)).objective
    assert ours == pytest.approx(other, rel=1e-5)


def test_objective_scaling_is_linear():
    rng = np.random.default_rng(99)
    c, A, b, cones = random_program(rng)
    base = solve_conic(make_model(c, A, b, cones), NATIVE).objective
    scaled = solve_conic(make_model(3.0 * c, A, b, cones), NATIVE).objective
    assert scaled == pytest.approx(3.0 * base, rel=1e-5)


@settings(max_examples=200)
@given(arrays(float, st.integers(2, 5), elements=st.floats(-1e3, 1e3)))
def test_soc_projection_properties(v):
    p = project_soc(v)
    assert np.linalg.norm(p[1:]) <= p[0] + 1e-9 * (1 + abs(v).max())
    assert np.allclose(project_soc(p), p, atol=1e-9 * (1 + abs(v).max()))
    # Moreau: v - p lies in the polar cone and is orthogonal to p
    r = v - p
    assert abs(p @ r) <= 1e-7 * (1 + v @ v)
    assert np.linalg.norm(r[1:]) <= -r[0] + 1e-9 * (1 + abs(v).max())
