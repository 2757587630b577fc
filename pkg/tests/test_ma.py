import math

import numpy as np
import pytest

from conemink.cone import Cone
from conemink.errors import ConvergenceError, PreconditionError
from conemink.ma import (ConvexPLFunction, SolverOptions, blaschke_sum, cell_oracle, cell_volumes,
                         domain_from_polygon, solve, solve_dirichlet, solve_dominated)
from conemink.mink2d import AngularMeasure, solve2d
from conemink.pseudocone import PseudoCone, support, support_many
from conemink.sam import DiscreteMeasure, surface_measure
from conemink.verify import random_cone_3d, random_domain_directions, random_ma_instance, random_pseudocone_3d

SQUARE = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])


def test_cross_polytope_cell():
    f = ConvexPLFunction(domain_from_polygon(SQUARE), [[0.0, 0.0]], [-1.0])
    cell = cell_oracle(f, 0)
    assert cell.volume == pytest.approx(2.0, abs=1e-14)
    assert cell_volumes(f)[0] == pytest.approx(2.0, abs=1e-14)


def test_degenerate_node_has_empty_cell():
    f = ConvexPLFunction(domain_from_polygon(SQUARE), [[0.0, 0.0]], [0.0])
    assert cell_oracle(f, 0).inactive


def test_interval_cell():
    f = ConvexPLFunction(domain_from_polygon([-1.0, 1.0]), [[0.0]], [-1.0])
    assert cell_oracle(f, 0).volume == 2.0


@pytest.mark.parametrize("method", ["newton", "oliker-prussner"])
def test_single_node_fixed_point(method):
    f = solve_dirichlet([[0.0, 0.0]], [2.0], domain_from_polygon(SQUARE),
                        SolverOptions(tol=1e-12, method=method))
    assert f.values[0] == pytest.approx(-1.0, abs=1e-9)


def test_zero_node_problem():
    f = solve_dirichlet(np.zeros((0, 2)), [], domain_from_polygon(SQUARE))
    assert len(f) == 0


def test_oliker_prussner_roundtrip_and_monotone_values():
    rng = np.random.default_rng(4)
    dom, nodes, vals = random_ma_instance(rng, 3, 8)
    gen = ConvexPLFunction(dom, nodes, vals)
    vols = cell_volumes(gen)
    act = vols > 0
    f = solve_dirichlet(nodes[act], vols[act], dom, SolverOptions(tol=1e-10, method="oliker-prussner"))
    np.testing.assert_allclose(f.values, vals[act], atol=1e-6)


def test_newton_and_oracle_agree():
    rng = np.random.default_rng(5)
    dom, nodes, vals = random_ma_instance(rng, 5, 15)
    gen = ConvexPLFunction(dom, nodes, vals)
    vols = cell_volumes(gen)
    f = solve_dirichlet(nodes[vols > 0], vols[vols > 0], dom)
    assert f.report["oracle_max_rel_diff"] <= 1e-9


def test_nodes_outside_domain_rejected():
    with pytest.raises(PreconditionError):
        solve_dirichlet([[2.0, 0.0]], [1.0], domain_from_polygon(SQUARE))


def test_huge_mass_hits_depth_limit():
    with pytest.raises(PreconditionError, match="mass too large"):
        solve_dirichlet([[0.0, 0.0]], [1e12], domain_from_polygon(SQUARE))


def test_iteration_cap_reports_residuals():
    rng = np.random.default_rng(6)
    dom, nodes, vals = random_ma_instance(rng, 10, 20)
    vols = cell_volumes(ConvexPLFunction(dom, nodes, vals))
    act = vols > 0
    with pytest.raises(ConvergenceError) as info:
        solve_dirichlet(nodes[act], vols[act], dom, SolverOptions(max_iter=1, polish_steps=0, tol=1e-14))
    assert len(info.value.residuals) == int(act.sum())


def test_solve_empty_measure_gives_cone():
    k, _ = solve(DiscreteMeasure.empty(Cone.planar(0.5)))
    assert len(k.normals) == 0


def test_solve_three_atoms_roundtrip_3d():
    rng = np.random.default_rng(7)
    cone = random_cone_3d(rng)
    v = random_domain_directions(cone, 3, rng, margin=0.2)
    mu = DiscreteMeasure.from_atoms(cone, v, rng.uniform(0.5, 2.0, 3))
    k, f = solve(mu)
    s = surface_measure(k)
    idx = mu.match(s, 1e-9)
    assert None not in idx
    np.testing.assert_allclose(s.weights[idx], mu.weights, rtol=1e-8)


def test_planar_solver_route_agrees_with_exact_solver():
    mu = AngularMeasure.from_atoms(math.pi / 4, [(-0.3, 1.0), (0.3, 1.0), (0.1, 2.5)])
    exact = solve2d(mu)
    k, _ = solve(mu.to_discrete())
    d = mu.to_discrete().directions
    np.testing.assert_allclose(support_many(k, d), support_many(exact, d), atol=1e-12)


def test_dominated_fixed_point_and_error():
    rng = np.random.default_rng(8)
    L = random_pseudocone_3d(rng, cuts=4)
    S = surface_measure(L)
    K, rep = solve_dominated(S, L)
    assert all(e["contains_L"] for e in rep["levels"])
    np.testing.assert_allclose(support_many(K, S.directions), support_many(L, S.directions), atol=1e-9)
    with pytest.raises(PreconditionError, match="hypothesis failed at atom"):
        solve_dominated(S.scaled(1.5), L)


def test_blaschke_planar_single_atoms():
    c = Cone.planar(math.pi / 4)
    K = PseudoCone.from_cuts(c, [[1.0, 0.0]], [-1.0])
    L = PseudoCone.from_cuts(c, [[1.0, 0.0]], [-1.5])
    Q, rep = blaschke_sum(K, L)
    assert surface_measure(Q).weights.tolist() == [5.0]
    assert support(Q, [1.0, 0.0]) == pytest.approx(-2.5)


def test_blaschke_rejects_non_asymptotic():
    c = Cone.planar(math.pi / 4)
    K = PseudoCone.from_cuts(c, [c.dual_normals[0]], [-1.0])
    with pytest.raises(PreconditionError):
        blaschke_sum(K, K)
