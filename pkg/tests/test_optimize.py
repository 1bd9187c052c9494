from __future__ import annotations

import numpy as np
import pytest

from sgbspline.exceptions import DomainError, InfeasibleError
from sgbspline.grid import regular_grid
from sgbspline.optimize import (
    METHODS,
    OptimizationProblem,
    OptimizerConfig,
    RefinementConfig,
    armijo_line_search,
    find_feasible_point,
    minimize_constrained,
    minimize_unconstrained,
    new_children,
    novak_ritter_criterion,
    novak_ritter_generate,
    optimize_surrogate,
    ranks,
)
from sgbspline.grid import direct_ancestors, mth_order_children
from sgbspline.surrogate import Interpolant
from sgbspline.testfns import make_problem


def bowl(d=2):
    return OptimizationProblem(lambda x: float(np.sum((x - 0.5) ** 2)), d, gradient=lambda x: 2 * (x - 0.5))


def test_armijo_quadratic():
    f = lambda x: float(x @ x)
    x = np.array([1.0])
    g = 2 * x
    res = armijo_line_search(f, x, -g, 1.0, g)
    assert res.accepted
    assert f(x - res.step * g) <= f(x) + 1e-4 * res.step * float(g @ -g)


def test_armijo_constant_accepts_first_step():
    res = armijo_line_search(lambda x: 3.0, np.zeros(2), np.ones(2), 0.7, np.zeros(2))
    assert res.accepted and res.step == 0.7


def test_armijo_random_quadratics():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = rng.normal(size=(3, 3))
        q = a @ a.T + 0.1 * np.eye(3)
        b = rng.normal(size=3)
        f = lambda x: float(0.5 * x @ q @ x - b @ x)
        x = rng.normal(size=3)
        g = q @ x - b
        res = armijo_line_search(f, x, -g, 1.0, g)
        assert res.accepted
        assert f(x - res.step * g) <= f(x) - 1e-4 * res.step * float(g @ g) + 1e-12


def test_armijo_rejects_ascent_direction():
    with pytest.raises(DomainError):
        armijo_line_search(lambda x: float(x @ x), np.ones(1), np.ones(1), 1.0, np.array([2.0]))


@pytest.mark.parametrize("method", METHODS)
def test_all_methods_find_bowl_minimum(method):
    res = minimize_unconstrained(bowl(), method, 500, seed=3)
    assert np.max(np.abs(res.x - 0.5)) <= 1e-3
    assert res.evaluations <= 500
    assert res.f == pytest.approx(bowl().objective(res.x))
    assert np.all((res.x >= 0) & (res.x <= 1))


def test_best_so_far_is_monotone():
    res = minimize_unconstrained(bowl(), "nelder-mead", 200)
    rows = res.trace_rows()
    best = [r[2] for r in rows]
    assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))
    assert res.f <= min(r[1] for r in rows)


def test_nlcg_exact_line_search_terminates_in_d_steps():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(3, 3))
    q = a @ a.T + np.eye(3)
    xs = np.array([0.4, 0.6, 0.5])
    prob = OptimizationProblem(lambda x: float(0.5 * (x - xs) @ q @ (x - xs)), 3, gradient=lambda x: q @ (x - xs))
    res = minimize_unconstrained(prob, "nlcg", 5000, x0=np.full(3, 0.45),
                                 config=OptimizerConfig(line_search="exact"))
    assert res.iterations <= 4
    assert np.max(np.abs(res.x - xs)) <= 1e-8


def test_de_reproducible_and_needs_seed():
    p = bowl(3)
    a = minimize_unconstrained(p, "differential-evolution", 300, seed=11)
    b = minimize_unconstrained(p, "differential-evolution", 300, seed=11)
    assert a.x.tobytes() == b.x.tobytes() and a.trace == b.trace
    with pytest.raises(DomainError):
        minimize_unconstrained(p, "differential-evolution", 300)


def test_budget_and_gradient_checks():
    with pytest.raises(DomainError):
        minimize_unconstrained(bowl(3), "nelder-mead", 3)
    with pytest.raises(DomainError):
        minimize_unconstrained(OptimizationProblem(lambda x: 0.0, 2), "bfgs", 100)
    with pytest.raises(DomainError):
        minimize_unconstrained(bowl(), "newton", 100)


def linear_constrained():
    return OptimizationProblem(lambda x: float(x[0]), 2, constraints=lambda x: np.array([0.3 - x[0]]))


@pytest.mark.parametrize("method", ["augmented-lagrangian", "squared-penalty", "log-barrier"])
def test_active_linear_constraint(method):
    res = minimize_constrained(linear_constrained(), method, 10000, seed=0)
    assert res.x[0] == pytest.approx(0.3, abs=1e-4)
    assert res.violation <= 1e-6


def test_augmented_lagrangian_needs_smaller_penalty():
    al = minimize_constrained(linear_constrained(), "augmented-lagrangian", 10000, seed=0)
    sp = minimize_constrained(linear_constrained(), "squared-penalty", 10000, seed=0)
    assert al.violation <= 1e-6 and sp.violation <= 1e-6
    assert sp.penalty / al.penalty >= 10


def test_unconstrained_problem_delegates():
    p = bowl()
    a = minimize_constrained(p, "augmented-lagrangian", 400, seed=1)
    b = minimize_unconstrained(p, "bfgs", 400, seed=1)
    np.testing.assert_array_equal(a.x, b.x)


@pytest.mark.parametrize("name", ["G08", "G04Sq"])
def test_benchmark_constraint_violation(name):
    tp = make_problem(name)
    prob = OptimizationProblem(tp.objective, tp.dim, constraints=tp.constraints)
    res = minimize_constrained(prob, "augmented-lagrangian", 10000, seed=0)
    assert res.violation <= 1e-4


def test_find_feasible_point():
    r = find_feasible_point(lambda x: np.array([x[0] - 0.5]), 2, x0=np.array([0.9, 0.2]))
    assert r.feasible and r.x[0] <= 0.5
    r = find_feasible_point(lambda x: np.array([-1.0]), 3)
    assert r.feasible and r.evaluations == 1
    np.testing.assert_array_equal(r.x, 0.5)
    r = find_feasible_point(lambda x: np.array([1.0]), 2)
    assert not r.feasible and r.slack == pytest.approx(1.0)


def test_barrier_reports_infeasible_problem():
    p = OptimizationProblem(lambda x: float(x[0]), 1, constraints=lambda x: np.array([1.0]))
    with pytest.raises(InfeasibleError):
        minimize_constrained(p, "log-barrier", 500)


def test_criterion_value():
    assert novak_ritter_criterion(1, 2, 0, 0.15) == pytest.approx(2**0.15 * 3**0.85, abs=1e-12)
    assert float(novak_ritter_criterion(1, 2, 0, 0.15)) == pytest.approx(2.82298, abs=1e-5)


def test_gamma_zero_ignores_rank():
    lv, deg = np.array([3, 1, 2]), np.array([0, 2, 0])
    a = novak_ritter_criterion([1, 2, 3], lv, deg, 0.0)
    b = novak_ritter_criterion([3, 1, 2], lv, deg, 0.0)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(a, lv + deg + 1)


def test_ranks_count_values_not_above():
    np.testing.assert_array_equal(ranks([3.0, 1.0, 2.0, 1.0]), [4, 2, 3, 2])


def ugly(x):
    return float(np.sin(5 * x[0]) * np.cos(3 * x[1]) + (x[0] - 0.3) ** 2)


def test_generate_is_deterministic_and_rank_invariant():
    cfg = RefinementConfig(n_max=120, gamma=0.3)
    g1, v1 = novak_ritter_generate(ugly, cfg, "not-a-knot:3", d=2)
    g2, v2 = novak_ritter_generate(ugly, cfg, "not-a-knot:3", d=2)
    g3, _ = novak_ritter_generate(lambda x: np.exp(ugly(x)), cfg, "not-a-knot:3", d=2)
    assert len(g1) == 120
    assert list(g1) == list(g2) == list(g3)
    assert v1.tobytes() == v2.tobytes()


def test_generated_grid_has_refinement_ancestors():
    grid, _ = novak_ritter_generate(ugly, RefinementConfig(n_max=150), "not-a-knot:3", d=2)
    members = set(grid)
    initial = set(regular_grid(1, 2))
    for p in grid:
        if p in initial:
            continue
        # p was inserted along some dimension t whose whole hierarchical chain is present
        assert any(direct_ancestors(p, t) and all(a in members for a in direct_ancestors(p, t))
                   for t in range(2))


def test_new_children_skip_existing():
    g = regular_grid(2, 1)
    root = g[2]  # level 1
    kids = new_children(g, root)
    assert all(k not in g for k in kids)
    assert set(kids) == set(mth_order_children(root, 0, 2))


def test_pipeline_recovers_cubic_minimizer():
    g = regular_grid(4, 2)
    cubic = lambda x: (x[0] - 0.4) ** 2 * (x[0] + 1) + (x[1] - 0.6) ** 2 * (x[1] + 2)
    fs = Interpolant.from_values(g, "not-a-knot:3", cubic)
    f = lambda x: float(fs.evaluate(x))
    res = optimize_surrogate(f, 2, RefinementConfig(n_max=60), "not-a-knot:3", seed=0)
    np.testing.assert_allclose(res.x, [0.4, 0.6], atol=1e-6)
    assert res.f <= np.min(res.values)


def test_goldstein_price_gap():
    p = make_problem("GoP")
    res = optimize_surrogate(p, 2, RefinementConfig(n_max=1000, gamma=0.15), "nak-modified:3", seed=0)
    assert res.f - p.f_opt <= 1e-2
    assert res.f <= np.min(res.values)
    assert res.evaluations <= 1000 + 3
