"""Shared helpers: grid-aligned basis evaluation and value normalisation."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..basis.families import as_tensor_spec
from ..basis.tables import FunctionTable, grid_coordinates
from ..exceptions import DomainError
from ..grid import SparseGrid


class GridEvaluator:
    """Basis functions of a grid evaluated at the grid's own points.

    Per dimension, the distinct 1-D functions are evaluated once at the
    distinct coordinates, so every matrix entry ``phi_c(x_r)`` is a product of
    ``d`` table lookups.
    """

    def __init__(self, grid: SparseGrid, spec):
        self.grid = grid
        self.spec = as_tensor_spec(spec, grid.dim)
        levels, indices = grid.levels, grid.indices
        self.points = grid_coordinates(self.spec, levels, indices)
        self.fid: list[np.ndarray] = []
        self.xid: list[np.ndarray] = []
        self.tables: list[np.ndarray] = []
        for t in range(grid.dim):
            pairs = np.stack([levels[:, t], indices[:, t]], axis=1)
            funcs, fid = np.unique(pairs, axis=0, return_inverse=True)
            coords, xid = np.unique(self.points[:, t], return_inverse=True)
            table = FunctionTable(self.spec[t], funcs[:, 0], funcs[:, 1]).evaluate(coords)
            self.fid.append(np.asarray(fid).ravel())
            self.xid.append(np.asarray(xid).ravel())
            self.tables.append(table)

    def __len__(self) -> int:
        return len(self.grid)

    def column(self, c: int, rows: np.ndarray | slice | None = None) -> np.ndarray:
        """Values of basis function ``c`` at the grid points ``rows``."""
        sel = slice(None) if rows is None else rows
        out = self.tables[0][self.fid[0][c], self.xid[0][sel]].copy()
        for t in range(1, len(self.tables)):
            out *= self.tables[t][self.fid[t][c], self.xid[t][sel]]
        return out

    def row(self, r: int) -> np.ndarray:
        """Values of all basis functions at grid point ``r``."""
        out = self.tables[0][self.fid[0], self.xid[0][r]].copy()
        for t in range(1, len(self.tables)):
            out *= self.tables[t][self.fid[t], self.xid[t][r]]
        return out

    def matrix(self) -> np.ndarray:
        """Dense interpolation matrix ``A[r, c] = phi_c(x_r)``."""
        n = len(self.grid)
        out = np.empty((n, n))
        step = max(1, (1 << 22) // max(n, 1))
        for lo in range(0, n, step):
            rows = slice(lo, min(lo + step, n))
            block = self.tables[0][self.fid[0][None, :], self.xid[0][rows, None]].copy()
            for t in range(1, len(self.tables)):
                block *= self.tables[t][self.fid[t][None, :], self.xid[t][rows, None]]
            out[rows] = block
        return out


def grid_values(grid: SparseGrid, spec, values) -> np.ndarray:
    """Normalise data: a callable on [0,1]^d is sampled, arrays are checked."""
    if callable(values):
        pts = grid_coordinates(as_tensor_spec(spec, grid.dim), grid.levels, grid.indices)
        out = np.array([values(x) for x in pts], dtype=float)
    else:
        out = np.array(values, dtype=float)
    if out.shape[0] != len(grid):
        raise DomainError(f"expected {len(grid)} values, got {out.shape[0]}")
    return out


def scale_of(values: np.ndarray) -> float:
    return float(max(np.max(np.abs(values)) if values.size else 0.0, 1e-300))


ValueSource = np.ndarray | Callable[[np.ndarray], float]
