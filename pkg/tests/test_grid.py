from __future__ import annotations

import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sgbspline.exceptions import DomainError
from sgbspline.grid import (
    LevelIndex,
    LevelSet,
    SparseGrid,
    canonicalize,
    coarse_boundary_count,
    coarse_boundary_levels,
    direct_ancestors,
    direct_children,
    interior_point_count,
    is_dimensionally_adaptive,
    load_grid,
    mth_order_children,
    point_coordinate,
    regular_grid,
    regular_grid_coarse_boundary,
    regular_point_count,
    save_grid,
)


def test_point_coordinates():
    assert point_coordinate(((3,), (5,))) == pytest.approx([0.625])
    assert point_coordinate(((0,), (1,))) == pytest.approx([1.0])
    np.testing.assert_array_equal(point_coordinate(((2, 1), (1, 1))), [0.25, 0.5])


def test_point_coordinate_rejects_bad_index():
    with pytest.raises(DomainError):
        point_coordinate(((2,), (5,)))


@pytest.mark.parametrize("level, index, expected", [(3, 4, (1, 1)), (3, 6, (2, 3)), (5, 0, (0, 0)), (2, 4, (0, 1))])
def test_canonicalize(level, index, expected):
    p = canonicalize((level,), (index,))
    assert (p.level[0], p.index[0]) == expected


def test_canonicalize_out_of_range():
    with pytest.raises(DomainError):
        canonicalize((2,), (7,))


@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 256)), min_size=1, max_size=4))
def test_canonicalize_idempotent_and_exact(pairs):
    level = tuple(l for l, _ in pairs)
    index = tuple(i % ((1 << l) + 1) for l, i in pairs)
    p = canonicalize(level, index)
    assert canonicalize(p.level, p.index) == p
    np.testing.assert_array_equal(point_coordinate(p), point_coordinate((level, index)))


def test_regular_grid_examples():
    assert len(regular_grid(3, 3)) == 123
    g = regular_grid(1, 1)
    assert {(p.level, p.index) for p in g} == {((0,), (0,)), ((0,), (1,)), ((1,), (1,))}
    assert len(regular_grid(0, 2)) == 4


def test_regular_grid_order_by_level_sum():
    sums = regular_grid(4, 2).levels.sum(axis=1)
    assert np.all(np.diff(sums) >= 0)


def test_one_dimensional_hierarchical_decomposition():
    for level in range(6):
        xs = sorted(regular_grid(level, 1).coordinates()[:, 0])
        np.testing.assert_array_equal(xs, np.arange((1 << level) + 1) / (1 << level))


def test_regular_count_formula_matches_enumeration():
    for d in range(1, 5):
        for n in range(0, 8 if d < 4 else 6):
            formula = sum(2**q * comb(d, q) * (interior_point_count(n, d - q) if q < d else 1)
                          for q in range(d + 1))
            assert regular_point_count(n, d) == len(regular_grid(n, d)) == formula


def test_interior_counts():
    assert [interior_point_count(n, 3) for n in range(3, 11)] == [1, 7, 31, 111, 351, 1023, 2815, 7423]
    assert interior_point_count(13, 10) == 2001
    assert interior_point_count(2, 3) == 0
    g = regular_grid(6, 3)
    assert int(np.sum(np.all(g.levels >= 1, axis=1))) == interior_point_count(6, 3)


def test_interior_count_is_grid_without_boundary():
    for d, n in [(2, 5), (3, 6)]:
        assert len(regular_grid(n, d, boundary=False)) == interior_point_count(n, d)


def test_coarse_boundary_examples():
    assert coarse_boundary_count(3, 3, 1) == 27
    assert coarse_boundary_count(3, 3, 2) == 9
    assert coarse_boundary_count(4, 3, 3) == len(regular_grid_coarse_boundary(4, 3, 3))
    with pytest.raises(DomainError):
        regular_grid_coarse_boundary(2, 3, 1)


def test_coarse_boundary_count_oracle():
    for d in range(1, 5):
        for n in range(d, 9 if d < 4 else 7):
            for b in (1, 2, 3):
                g = regular_grid_coarse_boundary(n, d, b)
                assert coarse_boundary_count(n, d, b) == len(g)
                corners = {LevelIndex((0,) * d, c) for c in itertools.product((0, 1), repeat=d)}
                assert corners <= set(g)


def test_coarse_boundary_b1_level_set():
    n, d = 5, 3
    levels = set(coarse_boundary_levels(n, d, 1))
    expected = {l for l in itertools.product(range(n + 1), repeat=d) if sum(max(a, 1) for a in l) <= n}
    assert levels == expected


def test_direct_children():
    assert direct_children(((0,), (0,))) == [LevelIndex((1,), (1,))]
    assert direct_children(((2,), (3,))) == [LevelIndex((3,), (5,)), LevelIndex((3,), (7,))]
    assert len(direct_children(((1, 1), (1, 1)))) == 4


def test_mth_order_children():
    assert mth_order_children(((0,), (0,)), 0, 2) == [LevelIndex((2,), (1,))]
    assert mth_order_children(((0,), (1,)), 0, 2) == [LevelIndex((2,), (3,))]
    assert mth_order_children(((1,), (1,)), 0, 1) == direct_children(((1,), (1,)))


@settings(max_examples=50)
@given(st.integers(1, 6), st.integers(0, 63), st.integers(1, 6), st.integers(0, 63))
def test_children_and_ancestors_are_inverse(l1, i1, l2, i2):
    p = canonicalize((l1, l2), (min(i1, 1 << l1), min(i2, 1 << l2)))
    for t in range(2):
        for q in direct_children(p, t):
            assert p in direct_ancestors(q, t)


def test_sparse_grid_invariants(tmp_path):
    g = SparseGrid(2)
    assert g.add(((3, 0), (4, 0))) == 0
    assert g.add(((1, 0), (1, 0))) == 0  # same point after canonicalization
    assert len(g) == 1 and g[0] == LevelIndex((1, 0), (1, 0))
    g.increment_degree(g[0])
    assert g.degree(g[0]) == 1
    save_grid(regular_grid(3, 2), tmp_path / "g.txt")
    h = load_grid(tmp_path / "g.txt")
    assert list(h) == list(regular_grid(3, 2))
    assert (tmp_path / "g.txt").read_text().startswith("d=2 n=")


def test_level_set():
    ls = LevelSet([(0, 0), (1, 0), (0, 1), (2, 0)])
    assert ls.is_downward_closed()
    assert not LevelSet([(0, 0), (2, 0)]).is_downward_closed()
    assert is_dimensionally_adaptive(ls.grid())
    g = regular_grid(2, 2)
    g.add(((3, 0), (1, 0)))
    assert not is_dimensionally_adaptive(g)
