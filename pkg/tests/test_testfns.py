from __future__ import annotations

import numpy as np
import pytest

from sgbspline.exceptions import DomainError
from sgbspline.grid import regular_grid
from sgbspline.hierarchize import unidirectional_principle
from sgbspline.testfns import ALP02_FACTOR, PROBLEMS, displaced, make_problem, spd_field

DIMS = {"Ack": 3, "Alp02": 3, "Sch22": 4}


def problem(name):
    return make_problem(name, DIMS.get(name))


@pytest.mark.parametrize("name", PROBLEMS)
def test_optimal_value_at_stated_minimizer(name):
    p = problem(name)
    assert p.objective(p.x_opt) == pytest.approx(p.f_opt, abs=1e-10)
    assert np.all((p.x_opt >= 0) & (p.x_opt <= 1))


def test_unscaled_reference_values():
    assert make_problem("GoP").raw_objective(np.array([0.0, -1.0])) == pytest.approx(3e-4, abs=1e-14)
    for d in (1, 2, 5):
        assert make_problem("Ack", d).raw_objective(np.full(d, 1.974451986484)) == pytest.approx(6.559645375628,
                                                                                                abs=1e-10)
    assert make_problem("Sch06").raw_objective(np.array([1.0, 3.0])) == 0.0
    # the commonly printed digits 2.808131180070 are off by 6e-11 from the true maximum
    assert make_problem("Alp02", 3).f_opt == pytest.approx(-2.808131180070**3, abs=1e-8)
    x = np.linspace(7.9, 7.93, 30001)
    assert ALP02_FACTOR == pytest.approx(np.max(np.sqrt(x) * np.sin(x)), abs=1e-12)


@pytest.mark.parametrize("name", PROBLEMS)
def test_stated_optimum_is_local_minimum(name):
    p = problem(name)
    rng = np.random.default_rng(0)
    x = np.clip(p.x_opt + rng.uniform(-1e-3, 1e-3, (1000, p.dim)), 0.0, 1.0)
    vals = p.objective(x)
    if p.constrained:
        ok = np.array([p.violation(v) <= 0 for v in x])
        vals = vals[ok]
    assert np.all(vals >= p.f_opt - 1e-9)


@pytest.mark.parametrize("name", ["G08", "G04Sq"])
def test_stated_optimum_is_feasible(name):
    p = make_problem(name)
    assert p.violation(p.x_opt) <= 1e-9


def test_scaling_roundtrip():
    p = make_problem("Bra02")
    x = np.array([0.2, 0.9])
    np.testing.assert_allclose(p.scale(p.unscale(x)), x)
    assert p.objective(x) == pytest.approx(p.raw_objective(p.unscale(x)))


def test_bad_names_and_dimensions():
    with pytest.raises(DomainError):
        make_problem("Rosenbrock")
    with pytest.raises(DomainError):
        make_problem("GoP", 3)
    with pytest.raises(DomainError):
        make_problem("Ack")
    with pytest.raises(DomainError):
        make_problem("G04Sq", 2)
    with pytest.raises(DomainError):
        make_problem("Sch06").constraints(np.zeros(2))


def interior_surpluses(p, n):
    g = regular_grid(n, p.dim)
    alpha = unidirectional_principle(g, "uniform:1", p.objective)
    return alpha[np.all(g.levels >= 1, axis=1)], np.max(np.abs(alpha))


@pytest.mark.parametrize("name", [n for n in PROBLEMS if n != "G04Sq"])
def test_not_trivial(name):
    p = problem(name)
    # G08 vanishes at all coarse dyadic points, so look a few levels deeper
    inner, _ = interior_surpluses(p, max(3, p.dim) + 2)
    assert np.max(np.abs(inner)) > 1e-6


def test_g04sq_objective_is_trivial():
    # the objective ignores x2 and x4, so interior hat surpluses vanish
    p = make_problem("G04Sq")
    inner, scale = interior_surpluses(p, 6)
    assert inner.size > 0 and np.max(np.abs(inner)) <= 1e-12 * scale


def test_displacement():
    p = make_problem("Bra02")
    same = displaced(p, np.zeros(2))
    x = np.array([0.3, 0.6])
    assert same.objective(x) == p.objective(x)
    a = np.array([0.01, -0.02])
    q = displaced(p, a)
    np.testing.assert_allclose(q.x_opt, p.x_opt + a)
    assert q.objective(q.x_opt) == pytest.approx(p.f_opt, abs=1e-10)
    assert q.objective(x + a) == pytest.approx(p.objective(x), abs=1e-12)


def test_displacement_respects_unsafe_mask():
    p = make_problem("G04Sq")
    q = displaced(p, seed=3)
    shift = q.x_opt - p.x_opt
    assert np.all(shift[~p.displaceable] == 0)
    assert np.any(shift[p.displaceable] != 0)
    assert q.objective(q.x_opt) == pytest.approx(p.f_opt, abs=1e-8)
    r = displaced(p, seed=3)
    np.testing.assert_array_equal(q.x_opt, r.x_opt)
    with pytest.raises(DomainError):
        displaced(p)


def test_spd_field():
    field = spd_field()
    rng = np.random.default_rng(1)
    for x in rng.uniform(size=(20, 2)):
        e = field(x)
        np.testing.assert_allclose(e, e.T)
        assert np.linalg.eigvalsh(e)[0] >= 0.1 - 1e-12
    np.testing.assert_array_equal(field(np.array([0.3, 0.4])), spd_field()(np.array([0.3, 0.4])))
    with pytest.raises(DomainError):
        spd_field(shift=0.0)
