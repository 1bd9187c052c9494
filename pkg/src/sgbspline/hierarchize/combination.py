"""Combination technique and residual interpolation on dimensionally adaptive grids."""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from ..basis.families import as_tensor_spec
from ..exceptions import DomainError
from ..grid import LevelSet, grid_from_levels, regular_grid, _compositions
from .common import GridEvaluator, grid_values
from .unidirectional import unidirectional_principle

# bases whose hierarchical spaces split into sums of full-grid spaces
SPLITTING_ANY_DEGREE = frozenset({"not-a-knot", "cc-not-a-knot", "fundamental-nak", "wfs-nak"})
SPLITTING_LINEAR = frozenset({"uniform", "clenshaw-curtis", "fundamental", "weakly-fundamental"})


def has_hierarchical_splitting(spec) -> bool:
    return all(
        s.family in SPLITTING_ANY_DEGREE or (s.degree == 1 and s.family in SPLITTING_LINEAR) for s in spec
    )


def _full_grid_positions(grid, level, minimum) -> tuple[object, np.ndarray]:
    levels = itertools.product(*(range(b, m + 1) for b, m in zip(minimum, level)))
    sub = grid_from_levels(levels, dim=len(level))
    return sub, np.array([grid.position(p) for p in sub], dtype=np.int64)


def hierarchize_combination(n: int, d: int, spec, values) -> np.ndarray:
    """Surpluses on ``regular_grid(n, d)`` by combining full-grid surpluses.

    Full-grid surpluses of all levels with ``|l|_1 = n - q`` are weighted by
    ``(-1)^q binom(d-1, q)`` and summed (zero-extended). Only bases with the
    hierarchical splitting property are accepted: hats (degree 1) and
    not-a-knot families of any degree.
    """
    specs = as_tensor_spec(spec, d)
    if not has_hierarchical_splitting(specs):
        raise DomainError(
            "the combination technique needs a basis whose hierarchical spaces split into "
            "full-grid spaces (hat functions or not-a-knot B-splines); got "
            + ", ".join(str(s) for s in specs)
        )
    grid = regular_grid(n, d)
    u = grid_values(grid, specs, values)
    y = np.zeros_like(u)
    for q in range(d):
        if n - q < 0:
            continue
        weight = (-1) ** q * comb(d - 1, q)
        for level in _compositions(n - q, d, 0):
            sub, pos = _full_grid_positions(grid, level, (0,) * d)
            y[pos] += weight * unidirectional_principle(sub, specs, u[pos])
    return y


def hierarchize_residual(levels, spec, values) -> np.ndarray:
    """Residual interpolation on the active full grids of a downward closed level set.

    Data and result are aligned with ``LevelSet(levels).grid()``.
    """
    ls = levels if isinstance(levels, LevelSet) else LevelSet(levels)
    if not ls.is_downward_closed():
        raise DomainError("residual interpolation needs a downward closed level set")
    grid = ls.grid()
    specs = as_tensor_spec(spec, grid.dim)
    u = grid_values(grid, specs, values)
    a = GridEvaluator(grid, specs).matrix()
    r = u.copy()
    y = np.zeros_like(u)
    for level in ls.maximal_levels():
        sub, pos = _full_grid_positions(grid, level, ls.base)
        alpha = unidirectional_principle(sub, specs, r[pos])
        y[pos] += alpha
        r -= a[:, pos] @ alpha
    return y
