from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgbspline.exceptions import DomainError
from sgbspline.fuzzy import (
    ExtensionConfig,
    alpha_cut,
    extension_principle,
    fuzzy_l2_error,
    fuzzy_novak_ritter,
    fuzzy_refinement_set,
    piecewise_linear,
    quasi_gaussian,
    trapezoidal,
    triangular,
)
from sgbspline.grid import regular_grid
from sgbspline.surrogate import Interpolant


def test_triangular_cuts():
    t = triangular(0, 0.5, 1)
    assert alpha_cut(t, 0) == pytest.approx((0, 1))
    assert alpha_cut(t, 1) == pytest.approx((0.5, 0.5))
    assert alpha_cut(t, 0.5) == pytest.approx((0.25, 0.75))
    with pytest.raises(DomainError):
        alpha_cut(t, 1.5)


def test_variants_are_normalized_and_bounded():
    for fz in (triangular(0, 0.2, 1), trapezoidal(0, 0.2, 0.4, 1), quasi_gaussian(0.5, 0.1, 3),
               piecewise_linear([(0, 0), (0.3, 0.6), (0.5, 1), (0.9, 0)])):
        lo, hi = fz.support
        x = np.linspace(lo - 0.5, hi + 0.5, 2001)
        mu = fz.membership(x)
        assert mu.max() == pytest.approx(1.0, abs=1e-3)
        assert np.all(mu[(x < lo) | (x > hi)] == 0)
    assert quasi_gaussian(0.5, 0.1, 3).support == pytest.approx((0.2, 0.8))


@settings(max_examples=60)
@given(st.floats(0, 1), st.floats(0, 1),
       st.sampled_from([triangular(0, 0.3, 1), trapezoidal(-1, 0, 1, 3), quasi_gaussian(0, 1, 2.5)]))
def test_cuts_are_nested(a1, a2, fz):
    lo, hi = sorted((a1, a2))
    outer, inner = fz.alpha_cut(lo), fz.alpha_cut(hi)
    assert outer[0] <= inner[0] + 1e-12 and inner[1] <= outer[1] + 1e-12


def test_membership_cut_consistency():
    fz = quasi_gaussian(0.5, 0.125, 3)
    # truncation at 3 sigma sits at height exp(-9/4) ~ 0.105; stay above it
    for alpha in (0.2, 0.5, 0.9):
        a, b = fz.alpha_cut(alpha)
        assert fz.membership(np.array([a + 1e-9, b - 1e-9])) == pytest.approx([alpha, alpha], abs=1e-6)


def test_csv_rows():
    rows = triangular(0, 0.5, 1).to_csv_rows(5)
    assert len(rows) == 5 and rows[2] == pytest.approx((0.5, 1.0))


CFG = ExtensionConfig(nelder_mead_starts=3, gradient_starts=3, budget_per_start=150)


def test_product_matches_corner_evaluation():
    inputs = [triangular(0.2, 0.5, 0.8), triangular(0.1, 0.4, 0.6)]
    f = lambda x: 6.4 * x[0] * x[1]
    out = extension_principle(f, inputs, m=10, config=CFG)
    for a, lo, hi in out.cuts:
        box = [fz.alpha_cut(a) for fz in inputs]
        corners = [f(np.array(c)) for c in itertools.product(*box)]
        assert lo == pytest.approx(min(corners), abs=1e-8)
        assert hi == pytest.approx(max(corners), abs=1e-8)


def test_identity_and_constant():
    inp = triangular(0.1, 0.3, 0.9)
    out = extension_principle(lambda x: float(x[0]), [inp], m=8, config=CFG)
    x = np.linspace(0, 1, 101)
    np.testing.assert_allclose(out.membership(x), inp.membership(x), atol=1e-8)
    const = extension_principle(lambda x: 2.5, [inp, inp], m=4, config=CFG)
    assert all(lo == hi == 2.5 for _, lo, hi in const.cuts)


def test_output_cuts_nested_and_normalized():
    g = regular_grid(4, 2)
    fs = Interpolant.from_values(g, "not-a-knot:3", lambda x: np.sin(4 * x[0]) * np.cos(3 * x[1]))
    out = extension_principle(fs, [quasi_gaussian(0.5, 0.125, 3), trapezoidal(0.1, 0.3, 0.4, 0.8)], m=10, config=CFG)
    lows = np.array([c[1] for c in out.cuts])
    highs = np.array([c[2] for c in out.cuts])
    assert np.all(np.diff(lows) >= -1e-8) and np.all(np.diff(highs) <= 1e-8)
    assert out.membership(np.array([lows[-1]]))[0] == pytest.approx(1.0)


def test_extension_rejects_bad_arguments():
    with pytest.raises(DomainError):
        extension_principle(lambda x: 0.0, [triangular(0, 0.5, 1)], m=0)
    with pytest.raises(DomainError):
        extension_principle(lambda x: 0.0, [], m=3)


def bump(x):
    return float(np.sum((x - 0.4) ** 2) + 0.3 * np.sin(6 * x[0]))


def test_fuzzy_grid_keeps_points_and_reaches_size():
    inputs = [triangular(0.3, 0.5, 0.7)] * 2
    start = regular_grid(3, 2, boundary=False)
    grid, values = fuzzy_novak_ritter(bump, inputs, 80, grid=start, m=5)
    assert len(grid) >= 80 and len(values) == len(grid)
    assert list(grid)[: len(start)] == list(start)


def test_crisp_inputs_concentrate_points():
    inputs = [triangular(0.7, 0.7, 0.7)] * 2
    grid, _ = fuzzy_novak_ritter(bump, inputs, 600, m=4)
    near = np.all(np.abs(grid.coordinates() - 0.7) <= 0.05, axis=1)
    assert near.mean() > 10 * 0.1**2


def test_refinement_set_has_no_duplicates():
    g = regular_grid(4, 2, boundary=False)
    x = g.coordinates()
    v = np.array([bump(p) for p in x])
    chosen = fuzzy_refinement_set(x, v, g.levels.sum(axis=1), g.degrees, [triangular(0.2, 0.5, 0.8)] * 2, 10, 0.1)
    assert len(chosen) == len(set(chosen)) and chosen


def test_each_selected_point_refined_once():
    inputs = [triangular(0.3, 0.5, 0.7)] * 2
    g0 = regular_grid(3, 2, boundary=False)
    grid, _ = fuzzy_novak_ritter(bump, inputs, len(g0) + 1, grid=g0, m=10)
    assert max(grid.degree(p) for p in grid) == 1


def test_l2_error_properties():
    t = triangular(0, 1, 2)
    assert fuzzy_l2_error(t, t) == 0.0
    assert fuzzy_l2_error(t, triangular(5, 6, 7)) == pytest.approx(np.sqrt(2), abs=1e-12)
    errs = [fuzzy_l2_error(triangular(0.5, 1, 1.5), triangular(0.5 * (1 + e), 1 + e, 1.5 * (1 + e)))
            for e in (0.001, 0.01, 0.02, 0.05)]
    assert all(b > a for a, b in zip(errs, errs[1:]))
    assert errs[0] < 1e-2
    qg = quasi_gaussian(0, 1, 3)
    assert fuzzy_l2_error(qg, qg) == 0.0
    assert 0 < fuzzy_l2_error(qg, triangular(-3, 0, 3)) < 1
