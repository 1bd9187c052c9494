"""Hierarchization by solving the full interpolation system."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve
from scipy.linalg.lapack import dgecon

from ..exceptions import HierarchizationError
from ..grid import SparseGrid
from .common import GridEvaluator, grid_values, scale_of

RESIDUAL_TOLERANCE = 1e-9


def assemble_matrix(grid: SparseGrid, spec) -> np.ndarray:
    """Interpolation matrix ``A[r, c] = phi_c(x_r)`` in grid order."""
    return GridEvaluator(grid, spec).matrix()


def condition_estimate(a: np.ndarray) -> float:
    """1-norm condition number estimate from an LU factorisation."""
    anorm = np.max(np.sum(np.abs(a), axis=0)) if a.size else 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, _ = lu_factor(a, check_finite=False)
    rcond, _ = dgecon(lu, anorm, norm="1")
    return float(np.inf) if rcond == 0 else 1.0 / rcond


def solve_interpolation(a: np.ndarray, u: np.ndarray, what: str = "interpolation system") -> np.ndarray:
    """Solve ``a @ x = u`` by LU with a relative residual check."""
    if a.shape[0] == 0:
        return np.zeros_like(u)
    with warnings.catch_warnings():
        warnings.simplefilter("error", LinAlgWarning)
        try:
            factor = lu_factor(a, check_finite=True)
        except (LinAlgWarning, ValueError) as exc:
            raise HierarchizationError(f"{what} is singular: {exc}", condition_estimate(a)) from None
    x = lu_solve(factor, u)
    resid = np.max(np.abs(a @ x - u)) if u.size else 0.0
    if not np.all(np.isfinite(x)) or resid > RESIDUAL_TOLERANCE * scale_of(u):
        raise HierarchizationError(
            f"{what} solved with residual {resid:.3e}", condition_estimate(a)
        )
    return x


def hierarchize_direct(grid: SparseGrid, spec, values, matrix: np.ndarray | None = None) -> np.ndarray:
    """Surpluses ``alpha`` with ``A alpha = values`` (values may be (N,) or (N, m))."""
    u = grid_values(grid, spec, values)
    a = assemble_matrix(grid, spec) if matrix is None else matrix
    return solve_interpolation(a, u)


def dehierarchize(grid: SparseGrid, spec, surpluses) -> np.ndarray:
    """Values of the interpolant at the grid points."""
    return assemble_matrix(grid, spec) @ np.asarray(surpluses, dtype=float)
