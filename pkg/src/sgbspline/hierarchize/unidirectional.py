"""Poles and the unidirectional principle."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..basis.families import BasisSpec, as_tensor_spec
from ..basis.tables import FunctionTable
from ..exceptions import DomainError, HierarchizationError
from ..grid import LevelIndex, SparseGrid
from .common import grid_values

Signature = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Pole:
    """Grid points equal in every component except ``dimension``, sorted by that coordinate."""

    dimension: int
    positions: np.ndarray

    def members(self, grid: SparseGrid) -> list[LevelIndex]:
        return [grid[int(k)] for k in self.positions]

    def __len__(self) -> int:
        return len(self.positions)


def _pole_ids(grid: SparseGrid, t: int) -> np.ndarray:
    levels, indices = grid.levels, grid.indices
    rest = np.concatenate([np.delete(levels, t, axis=1), np.delete(indices, t, axis=1)], axis=1)
    if rest.shape[1] == 0:
        return np.zeros(len(grid), dtype=np.int64)
    _, ids = np.unique(rest, axis=0, return_inverse=True)
    return np.asarray(ids).ravel()


def poles(grid: SparseGrid, t: int) -> list[Pole]:
    """Partition of the grid into the poles of dimension ``t`` (0-based)."""
    if not 0 <= t < grid.dim:
        raise DomainError(f"dimension {t} out of range for a {grid.dim}-dimensional grid")
    if len(grid) == 0:
        return []
    ids = _pole_ids(grid, t)
    coord = grid.indices[:, t] * np.ldexp(1.0, -grid.levels[:, t])
    perm = np.lexsort((coord, ids))
    cuts = np.nonzero(np.diff(ids[perm]))[0] + 1
    return [Pole(t, chunk) for chunk in np.split(perm, cuts)]


def pole_groups(grid: SparseGrid, t: int) -> dict[Signature, np.ndarray]:
    """Poles of dimension ``t`` grouped by their 1-D point set.

    Returns a map from the sorted 1-D ``(level, index)`` signature to a
    (poles, size) array of grid positions.
    """
    groups: dict[Signature, list[np.ndarray]] = defaultdict(list)
    lt, it = grid.levels[:, t], grid.indices[:, t]
    for pole in poles(grid, t):
        pos = pole.positions
        sig = tuple(zip(lt[pos].tolist(), it[pos].tolist()))
        groups[sig].append(pos)
    return {sig: np.stack(members) for sig, members in groups.items()}


def pole_matrix(spec: BasisSpec, sig: Signature) -> np.ndarray:
    """1-D interpolation matrix ``A[r, c] = phi_c(x_r)`` of a pole."""
    lv = np.array([s[0] for s in sig])
    ix = np.array([s[1] for s in sig])
    x = np.array([spec.point(int(l), int(i)) for l, i in sig])
    return FunctionTable(spec, lv, ix).evaluate(x).T


@lru_cache(maxsize=4096)
def _pole_lu(spec: BasisSpec, sig: Signature):
    a = pole_matrix(spec, sig)
    lu, piv = lu_factor(a)
    if np.min(np.abs(np.diag(lu))) < 1e-14 * max(np.max(np.abs(a)), 1.0):
        raise HierarchizationError(f"singular 1-D system on pole with points {sig}")
    return lu, piv


def solve_pole(spec: BasisSpec, sig: Signature, values: np.ndarray) -> np.ndarray:
    """Default 1-D hierarchization operator: LU solve on the pole."""
    return lu_solve(_pole_lu(spec, sig), values)


def evaluate_pole(spec: BasisSpec, sig: Signature, values: np.ndarray) -> np.ndarray:
    """1-D dehierarchization operator: evaluate the pole interpolant at its points."""
    return pole_matrix(spec, sig) @ values


PoleOperator = Callable[[BasisSpec, Signature, np.ndarray], np.ndarray]


def unidirectional_principle(
    grid: SparseGrid,
    spec,
    values,
    order: Sequence[int] | None = None,
    operator: PoleOperator = solve_pole,
) -> np.ndarray:
    """Apply a 1-D operator on all poles, one dimension after another.

    ``order`` is a permutation of ``0..d-1`` (default natural order). The
    result equals direct hierarchization whenever the grid and basis make the
    principle correct (full grids, regular grids with weakly fundamental
    bases, chain-closed grids).
    """
    specs = as_tensor_spec(spec, grid.dim)
    y = grid_values(grid, specs, values).copy()
    order = list(range(grid.dim)) if order is None else [int(t) for t in order]
    if sorted(order) != list(range(grid.dim)):
        raise DomainError(f"order {order} is not a permutation of the dimensions")
    for t in order:
        for sig, pos in pole_groups(grid, t).items():
            block = y[pos.T]  # (size, poles[, m])
            shape = block.shape
            out = operator(specs[t], sig, block.reshape(shape[0], -1))
            y[pos.T] = out.reshape(shape)
    return y


def dehierarchize_unidirectional(grid: SparseGrid, spec, surpluses, order: Sequence[int] | None = None) -> np.ndarray:
    """Evaluate an interpolant at its grid points pole by pole.

    Correct for the same configurations as the hierarchization principle when
    applied in the reversed dimension order.
    """
    order = list(range(grid.dim))[::-1] if order is None else list(order)
    return unidirectional_principle(grid, spec, surpluses, order, operator=evaluate_pole)
