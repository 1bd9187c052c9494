"""Breadth-first-search hierarchization for fundamental bases."""

from __future__ import annotations

import itertools
from collections import deque

import numpy as np

from ..basis.families import as_tensor_spec
from ..exceptions import DomainError
from ..grid import LevelIndex, SparseGrid, direct_children
from .common import GridEvaluator, grid_values

FUNDAMENTAL_FAMILIES = frozenset({"fundamental", "fundamental-nak", "fundamental-modified"})


def is_fundamental(spec) -> bool:
    """True if every dimension's basis vanishes at all coarser-or-equal-level points."""
    return all(s.degree == 1 or s.family in FUNDAMENTAL_FAMILIES for s in spec)


def bfs_roots(spec) -> list[LevelIndex]:
    """Initial points: corners for boundary bases, level one for modified ones."""
    per_dim = [[(1, 1)] if s.is_modified else [(0, 0), (0, 1)] for s in spec]
    roots = []
    for combo in itertools.product(*per_dim):
        roots.append(LevelIndex(tuple(c[0] for c in combo), tuple(c[1] for c in combo)))
    return roots


def hierarchize_bfs(grid: SparseGrid, spec, values) -> np.ndarray:
    """Forward substitution along the direct-ancestor DAG of the grid."""
    specs = as_tensor_spec(spec, grid.dim)
    if not is_fundamental(specs):
        raise DomainError("breadth-first-search hierarchization needs a fundamental basis")
    y = grid_values(grid, specs, values).copy()
    ev = GridEvaluator(grid, specs)
    levels, indices = grid.levels, grid.indices
    roots = bfs_roots(specs)
    missing = [r for r in roots if r not in grid]
    if missing:
        raise DomainError(f"grid lacks the initial points {missing}")
    processed = np.zeros(len(grid), dtype=bool)
    queue: deque[int] = deque()
    for r in roots:
        k = grid.position(r)
        processed[k] = True
        queue.append(k)
    while queue:
        k = queue.popleft()
        lk, ik = levels[k], indices[k]
        mask = np.all((levels > lk) | ((levels == lk) & (indices == ik)), axis=1)
        mask[k] = False
        rows = np.nonzero(mask)[0]
        if len(rows):
            col = ev.column(k, rows)
            y[rows] -= np.multiply.outer(col, y[k]) if y.ndim > 1 else col * y[k]
        for child in direct_children(grid[k]):
            if child in grid:
                c = grid.position(child)
                if not processed[c]:
                    processed[c] = True
                    queue.append(c)
    if not processed.all():
        lost = [grid[int(k)] for k in np.nonzero(~processed)[0][:5]]
        raise DomainError(f"grid points not reachable from the initial points, e.g. {lost}")
    return y
