import numpy as np
import pytest

import oracles
from corpus import random_step_function
from hypergraphon import (
    ConstraintSet,
    ObjectiveConfig,
    Signature,
    SolverConfig,
    edge,
    escalate,
    find_m0,
    fit_multipliers,
    interior_check,
    kkt_residual,
    make_step_function,
    solve,
    triangle,
)
from hypergraphon.errors import Infeasible, InfeasibleUpToMax, ValidationError
from hypergraphon.solver import constraint_residual, project_simplex, split_seeds
from hypergraphon.stepfn import aligned_l1, constant

G2 = Signature((2,))
EDGE_TRIANGLE = ConstraintSet.of([(edge(), oracles.RHO), (triangle(), oracles.TAU)])


def test_unconstrained_optimum_at_one_half():
    rep = solve(ConstraintSet.of([(edge(), 0.5)]), SolverConfig(m=1, restarts=2))
    best = rep.best
    assert best.W.arrays[0][0, 0] == pytest.approx(0.5, abs=1e-8)
    assert best.objective == pytest.approx(0, abs=1e-14)


def test_single_edge_constraint_gives_constant(solved):
    inst = solved["edge"]
    best = inst.report.best
    assert aligned_l1(best.W, constant(G2, oracles.RHO)) < 1e-6
    assert best.objective == pytest.approx(float(oracles.h_half(oracles.RHO)) / 2, abs=1e-10)
    rep = solve(inst.cs, SolverConfig(m=3, restarts=2))
    assert rep.best.objective == pytest.approx(best.objective, abs=1e-10)


def test_edge_triangle_report(edge_triangle):
    rep = edge_triangle.report
    z = oracles.bipodal_z()
    assert z == pytest.approx(0.19129311827723891, abs=1e-15)
    assert rep.best.objective == pytest.approx(0.087373904007827125, abs=1e-10)
    assert np.allclose(np.sort(rep.best.W.arrays[0].ravel()), sorted([0.3 - z] * 2 + [0.3 + z] * 2), atol=1e-6)
    assert rep.n_starts == 32 and rep.n_converged >= 1 and rep.converged
    assert len(rep.iterations) == 32
    assert rep.config["restarts"] == 32 and rep.objective["name"] == "entropy"


def test_kkt_residuals(edge_triangle):
    obj = ObjectiveConfig()
    cs_half = ConstraintSet.of([(edge(), 0.5)])
    assert kkt_residual(constant(G2, 0.5), [0.0], cs_half, obj) == pytest.approx(0, abs=1e-15)
    W = make_step_function(G2, [0.3, 0.7], [[[0.2, 0.6], [0.6, 0.9]]])
    assert kkt_residual(W, [0.0, 0.0], EDGE_TRIANGLE, obj) > 1e-3
    assert edge_triangle.report.best.kkt_residual < 1e-6


def test_fit_multipliers_edge_cases(edge_triangle):
    obj = ObjectiveConfig()
    beta, res = fit_multipliers(constant(G2, 0.5), ConstraintSet.of([(edge(), 0.5)]), obj)
    assert np.allclose(beta, 0) and res == pytest.approx(0, abs=1e-15)
    best = edge_triangle.report.best
    doubled = ConstraintSet.of([(edge(), oracles.RHO), (edge(), oracles.RHO), (triangle(), oracles.TAU)])
    beta2, res2 = fit_multipliers(best.W, doubled, obj)
    assert beta2[0] == pytest.approx(beta2[1], abs=1e-9)
    assert beta2[0] + beta2[1] == pytest.approx(best.beta[0], abs=1e-6)
    assert res2 < 1e-8


def test_find_m0():
    assert find_m0(ConstraintSet.of([(edge(), 0.5)])) == 2
    assert find_m0(EDGE_TRIANGLE) == 2


def test_find_m0_unreachable_target():
    with pytest.raises(InfeasibleUpToMax):
        find_m0(ConstraintSet.of([(edge(), 1.5)]), m_max=3, restarts=2)


def test_infeasible_targets():
    # Kruskal-Katona: the triangle density is at most the edge density to the power 3/2
    cs = ConstraintSet.of([(edge(), 0.3), (triangle(), 0.5)])
    with pytest.raises(Infeasible):
        solve(cs, SolverConfig(m=2, restarts=2, max_outer=8))


def test_interior_check(edge_triangle):
    assert interior_check(edge_triangle.report.best.W, 1e-4)
    assert not interior_check(make_step_function(G2, [0.5, 0.5], [[[0, 1], [1, 0]]]), 1e-4)
    assert interior_check(constant(G2, 0.5), 1e-4)


def test_escalation_of_single_edge():
    rep = escalate(ConstraintSet.of([(edge(), 0.4)]), SolverConfig(restarts=2), ObjectiveConfig(), 1, 3)
    assert rep.pod_holds and [lv.m for lv in rep.levels] == [1, 2, 3]
    for lv in rep.levels:
        assert aligned_l1(lv.report.best.W, constant(G2, 0.4)) < 1e-6


def test_split_seeds_cover_every_block():
    W = make_step_function(G2, [0.5, 0.5], [[[0.1, 0.5], [0.5, 0.1]]])
    seeds = split_seeds(W)
    assert len(seeds) == 6 and all(V.m == 3 for V in seeds)


def test_fixed_partition():
    cfg = SolverConfig(m=2, restarts=8, fixed_pi=(0.5, 0.5))
    rep = solve(EDGE_TRIANGLE, cfg)
    assert np.allclose(rep.best.W.pi, 0.5)
    assert rep.best.objective == pytest.approx(oracles.bipodal_rate(oracles.bipodal_z()), abs=1e-9)
    with pytest.raises(ValidationError):
        SolverConfig(m=2, fixed_pi=(0.7, 0.7))


def test_runs_are_reproducible_and_thread_independent():
    cs = ConstraintSet.of([(edge(), 0.35), (triangle(), 0.03)])
    a = solve(cs, SolverConfig(m=2, restarts=3, seed=4))
    b = solve(cs, SolverConfig(m=2, restarts=3, seed=4, threads=3))
    assert a.iterations == b.iterations
    assert np.array_equal(a.best.W.arrays[0], b.best.W.arrays[0])


def test_initial_points_and_warnings(solved):
    inst = solved["three_uniform"]
    assert any("non-linear" in w for w in inst.report.warnings)
    best = inst.report.best
    rep = solve(inst.cs, inst.cfg.replace(restarts=0), initial=[best.W])
    assert rep.best.restart == -1
    assert rep.best.objective == pytest.approx(best.objective, abs=1e-10)
    with pytest.raises(ValidationError):
        solve(inst.cs, inst.cfg.replace(m=3, restarts=0), initial=[best.W])


def test_solutions_satisfy_constraints(solved):
    for inst in solved.values():
        for s in inst.report.solutions:
            assert constraint_residual(s.W, inst.cs) < inst.cfg.constraint_tol
            assert s.kkt_residual < inst.cfg.kkt_tol
            assert s.jacobian_rank == len(inst.cs) or inst.cs.sig.n_params(s.W.m) < len(inst.cs)


def test_solutions_are_sorted_and_distinct(solved):
    for inst in solved.values():
        sols = inst.report.solutions
        assert [s.objective for s in sols] == sorted(s.objective for s in sols)
        for i in range(len(sols)):
            for j in range(i):
                assert aligned_l1(sols[i].W, sols[j].W) >= inst.cfg.cluster_tol


def test_project_simplex(rng):
    for _ in range(50):
        v = rng.normal(size=int(rng.integers(1, 8))) * 10
        p = project_simplex(v)
        assert p.sum() == pytest.approx(1) and p.min() >= 0
        # optimality: no feasible point of a random sample is closer
        q = rng.dirichlet(np.ones(len(v)))
        assert np.linalg.norm(p - v) <= np.linalg.norm(q - v) + 1e-12
    assert np.allclose(project_simplex(np.array([1e300, -1e300])), [1, 0])
    floored = project_simplex(np.array([5.0, -5.0, 0.0]), floor=0.01)
    assert floored.min() >= 0.01 - 1e-15 and floored.sum() == pytest.approx(1)


def test_constraint_set_validation():
    with pytest.raises(ValidationError):
        ConstraintSet.of([])
    with pytest.raises(ValidationError):
        ConstraintSet.of([(edge(), 0.3), (edge(Signature((2, 1))), 0.3)])


def test_solver_config_validation():
    with pytest.raises(ValidationError):
        SolverConfig(m=0)
    with pytest.raises(ValidationError):
        SolverConfig(eps=0.7)
    assert SolverConfig(inner_tol=1e-6).kkt_tol == pytest.approx(1e-5)


def test_random_point_is_not_critical(rng):
    W = random_step_function(rng, G2, 3)
    assert kkt_residual(W, [0.0, 0.0], EDGE_TRIANGLE, ObjectiveConfig()) > 1e-3
