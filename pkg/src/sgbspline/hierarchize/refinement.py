"""Iterative refinement with the unidirectional principle as preconditioner."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..basis.families import as_tensor_spec
from ..exceptions import ConvergenceError
from ..grid import SparseGrid
from .common import GridEvaluator, grid_values, scale_of
from .unidirectional import unidirectional_principle


def hierarchize_iterative_refinement(
    grid: SparseGrid,
    spec,
    values,
    tol: float | None = None,
    max_iter: int = 100,
    order: Sequence[int] | None = None,
) -> tuple[np.ndarray, int]:
    """Repeat ``y += UP(r); r -= A UP(r)`` until ``max|r| <= tol``.

    ``tol`` defaults to ``1e-10 * max|values|``. Returns the surpluses and the
    number of iterations; raises ConvergenceError if the residual does not
    drop below ``tol`` within ``max_iter`` iterations (or blows up).
    """
    specs = as_tensor_spec(spec, grid.dim)
    u = grid_values(grid, specs, values)
    tol = 1e-10 * scale_of(u) if tol is None else float(tol)
    a = GridEvaluator(grid, specs).matrix()
    y = np.zeros_like(u)
    r = u.copy()
    norm = float(np.max(np.abs(r))) if r.size else 0.0
    it = 0
    while norm > tol:
        if it >= max_iter or not np.isfinite(norm):
            raise ConvergenceError("iterative refinement did not converge", it, norm)
        delta = unidirectional_principle(grid, specs, r, order)
        y += delta
        r -= a @ delta
        norm = float(np.max(np.abs(r)))
        it += 1
    return y, it
