"""Novak-Ritter refinement: grids that concentrate points near small function values."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..basis.families import as_tensor_spec
from ..basis.tables import grid_coordinates
from ..exceptions import DomainError
from ..grid import LevelIndex, SparseGrid, mth_order_children, regular_grid

Array = np.ndarray


@dataclass(frozen=True)
class RefinementConfig:
    """Budget ``n_max``, adaptivity ``gamma`` and initial regular grid level.

    ``initial_level`` bounds the level sum of the initial regular grid. The
    default is ``d + 1`` without boundary points for modified bases (the
    centre and its direct children) and ``1`` with boundary points otherwise.
    """

    n_max: int = 1000
    gamma: float = 0.15
    initial_level: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise DomainError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.n_max < 1:
            raise DomainError("n_max must be positive")


def novak_ritter_criterion(rank, level_sum, degree, gamma: float) -> Array:
    """``(r + 1)^gamma * (|l|_1 + d + 1)^(1 - gamma)``."""
    r = np.asarray(rank, dtype=float)
    s = np.asarray(level_sum, dtype=float) + np.asarray(degree, dtype=float)
    return (r + 1.0) ** gamma * (s + 1.0) ** (1.0 - gamma)


def ranks(values) -> Array:
    """``r_k = |{j : f_j <= f_k}|`` (ties share the larger rank)."""
    v = np.asarray(values, dtype=float)
    return np.searchsorted(np.sort(v), v, side="right")


def initial_grid(d: int, spec, level: int | None = None) -> SparseGrid:
    specs = as_tensor_spec(spec, d)
    modified = all(s.is_modified for s in specs)
    if level is None:
        level = d + 1 if modified else 1
    return regular_grid(level, d, boundary=not modified)


def new_children(grid: SparseGrid, p: LevelIndex) -> list[LevelIndex]:
    """Children of ``p`` in every dimension, each of the lowest order not yet in the grid."""
    out: list[LevelIndex] = []
    seen: set[tuple] = set()
    for t in range(grid.dim):
        for slot in range(2):
            m = 1
            while True:
                kids = mth_order_children(p, t, m)
                if slot >= len(kids):
                    break
                kid = kids[slot]
                key = (kid.level, kid.index)
                if kid not in grid and key not in seen:
                    out.append(kid)
                    seen.add(key)
                    break
                m += 1
    return out


def novak_ritter_generate(
    f: Callable[[Array], float],
    config: RefinementConfig,
    spec,
    d: int | None = None,
    grid: SparseGrid | None = None,
) -> tuple[SparseGrid, Array]:
    """Grow a grid by repeatedly refining the criterion minimizer until ``n_max`` points.

    ``f`` is called once per new point with its coordinates under ``spec``.
    Ties in the criterion are broken by insertion order. The grid stops at
    exactly ``n_max`` points (the last refinement may insert only some
    children), unless the initial grid is already larger.
    """
    if grid is None:
        if d is None:
            raise DomainError("give the dimension or an initial grid")
        grid = initial_grid(d, spec, config.initial_level)
    else:
        grid = grid.copy()
    specs = as_tensor_spec(spec, grid.dim)

    def evaluate(levels: Array, indices: Array) -> list[float]:
        xs = grid_coordinates(specs, levels, indices)
        return [float(f(x)) for x in xs]

    values = evaluate(grid.levels, grid.indices)
    while len(grid) < config.n_max:
        crit = novak_ritter_criterion(ranks(values), grid.levels.sum(axis=1), grid.degrees, config.gamma)
        k = int(np.argmin(crit))
        p = grid[k]
        kids = new_children(grid, p)[: config.n_max - len(grid)]
        for kid in kids:
            grid.add(kid, canonical=True)
        if kids:
            lv = np.array([c.level for c in kids], dtype=np.int64)
            ix = np.array([c.index for c in kids], dtype=np.int64)
            values.extend(evaluate(lv, ix))
        grid.increment_degree(p)
    return grid, np.asarray(values)
