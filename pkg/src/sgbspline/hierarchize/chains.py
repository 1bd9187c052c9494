"""Chain closure: inserting points that make the unidirectional principle exact."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..exceptions import DomainError
from ..grid import LevelIndex, SparseGrid
from .common import GridEvaluator

NONZERO = 1e-12


def chain(start: LevelIndex, end: LevelIndex, order: Sequence[int]) -> list[LevelIndex]:
    """Points ``k^(0) = start, ..., k^(d) = end`` of the chain for a dimension order.

    ``k^(j)`` takes the components of ``end`` in the last ``j`` dimensions of
    ``order`` and those of ``start`` elsewhere.
    """
    d = len(order)
    out = [start]
    level, index = list(start.level), list(start.index)
    for j in range(1, d + 1):
        t = order[d - j]
        level[t], index[t] = end.level[t], end.index[t]
        out.append(LevelIndex(tuple(level), tuple(index)))
    return out


def chain_closure(
    grid: SparseGrid, spec, order: Sequence[int] | None = None, max_points: int | None = None
) -> SparseGrid:
    """Smallest superset containing the chain between every coupled pair of points.

    A pair ``(k', k'')`` is coupled if ``phi_{k'}(x_{k''}) != 0``. Insertion is
    repeated until no chain point is missing. The original points keep their
    positions as a prefix of the returned grid.
    """
    order = list(range(grid.dim)) if order is None else [int(t) for t in order]
    if sorted(order) != list(range(grid.dim)):
        raise DomainError(f"order {order} is not a permutation of the dimensions")
    out = grid.copy()
    if grid.dim == 1:
        return out
    while True:
        a = GridEvaluator(out, spec).matrix()
        rows, cols = np.nonzero(np.abs(a) > NONZERO)
        added = 0
        for r, c in zip(rows.tolist(), cols.tolist()):
            if r == c:
                continue
            for point in chain(out[c], out[r], order)[1:-1]:
                if point not in out:
                    out.add(point, canonical=True)
                    added += 1
        if not added:
            return out
        if max_points is not None and len(out) > max_points:
            raise DomainError(f"chain closure exceeded {max_points} points")


def is_chain_closed(grid: SparseGrid, spec, order: Sequence[int] | None = None) -> bool:
    return len(chain_closure(grid, spec, order)) == len(grid)
