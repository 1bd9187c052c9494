"""Sparse grid interpolants: evaluation, derivatives, extrapolation, SPD matrices."""

from __future__ import annotations

from typing import Callable

import numpy as np
from scipy.linalg.lapack import dpotrf

from .basis.families import as_tensor_spec
from .basis.tables import TensorBasis, grid_coordinates
from .exceptions import DomainError
from .grid import SparseGrid
from .hierarchize.common import grid_values
from .hierarchize.direct import assemble_matrix, solve_interpolation

DOMAIN_SLACK = 1e-12


class Interpolant:
    """``f^s(x) = sum_k alpha_k phi_k(x)`` on a sparse grid (scalar or vector valued)."""

    def __init__(self, grid: SparseGrid, spec, surpluses):
        self.grid = grid
        self.spec = as_tensor_spec(spec, grid.dim)
        self.surpluses = np.asarray(surpluses, dtype=float)
        if self.surpluses.shape[0] != len(grid):
            raise DomainError(f"{self.surpluses.shape[0]} surpluses for {len(grid)} grid points")
        self._basis: TensorBasis | None = None

    @classmethod
    def from_values(cls, grid: SparseGrid, spec, values) -> "Interpolant":
        """Interpolate data (array or callable) by direct hierarchization."""
        spec = as_tensor_spec(spec, grid.dim)
        u = grid_values(grid, spec, values)
        return cls(grid, spec, solve_interpolation(assemble_matrix(grid, spec), u))

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def basis(self) -> TensorBasis:
        if self._basis is None:
            self._basis = TensorBasis.for_grid(self.spec, self.grid)
        return self._basis

    def points(self) -> np.ndarray:
        """Grid point coordinates under this interpolant's basis."""
        return grid_coordinates(self.spec, self.grid.levels, self.grid.indices)

    def _prepare(self, x) -> tuple[np.ndarray, bool]:
        xa = np.asarray(x, dtype=float)
        single = xa.ndim == 1
        xa = np.atleast_2d(xa)
        if xa.shape[1] != self.dim:
            raise DomainError(f"expected points with {self.dim} coordinates")
        if np.any(xa < -DOMAIN_SLACK) or np.any(xa > 1 + DOMAIN_SLACK):
            raise DomainError("point outside [0, 1]^d; use extrapolated_evaluate")
        return np.clip(xa, 0.0, 1.0), single

    def evaluate(self, x):
        xa, single = self._prepare(x)
        out = self.basis.evaluate(self.surpluses, xa)
        return out[0] if single else out

    __call__ = evaluate

    def gradient(self, x) -> np.ndarray:
        xa, single = self._prepare(x)
        out = self.basis.gradient(self.surpluses, xa)
        return out[0] if single else out

    def hessian(self, x) -> np.ndarray:
        xa, single = self._prepare(x)
        out = self.basis.hessian(self.surpluses, xa)
        return out[0] if single else out

    def scaled(self, a: float, other: "Interpolant | None" = None, b: float = 0.0) -> "Interpolant":
        """``a * self + b * other`` on the same grid."""
        s = a * self.surpluses
        if other is not None:
            s = s + b * other.surpluses
        return Interpolant(self.grid, self.spec, s)


def evaluate(f: Interpolant, x):
    """Value of the interpolant at ``x`` (one point or rows of points)."""
    return f.evaluate(x)


def gradient(f: Interpolant, x) -> np.ndarray:
    return f.gradient(x)


def hessian(f: Interpolant, x) -> np.ndarray:
    return f.hessian(x)


EXTRAPOLATION_MODES = ("constant", "linear", "quadratic")


def extrapolated_evaluate(f: Interpolant, x, mode: str = "linear"):
    """Taylor extrapolation from the cropped point ``x_in = clip(x, 0, 1)``.

    ``constant`` returns ``f(x_in)``, ``linear`` adds ``grad f(x_in) . (x - x_in)``
    and ``quadratic`` additionally adds ``(x - x_in)^T H f(x_in) (x - x_in)``
    (without a factor 1/2, as in the underlying extrapolation formula).
    """
    if mode not in EXTRAPOLATION_MODES:
        raise DomainError(f"unknown extrapolation mode {mode!r}")
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    xa = np.atleast_2d(xa)
    xin = np.clip(xa, 0.0, 1.0)
    out = np.asarray(f.evaluate(xin), dtype=float)
    delta = xa - xin
    if mode != "constant" and np.any(delta):
        g = f.gradient(xin)
        out = out + np.einsum("nd,nd...->n...", delta, g)
        if mode == "quadratic":
            h = f.hessian(xin)
            out = out + np.einsum("nd,nde...,ne->n...", delta, h, delta)
    return out[0] if single else out


# -- SPD matrix-valued interpolation ---------------------------------------------

def _upper_indices(m: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(m)


def cholesky_upper(e: np.ndarray, where: str = "") -> np.ndarray:
    """Upper triangular R with positive diagonal and ``R^T R = e``."""
    r, info = dpotrf(np.asarray(e, dtype=float), lower=0, clean=1)
    if info > 0:
        raise DomainError(f"matrix {where} is not positive definite (pivot {info} fails)")
    if info < 0:
        raise DomainError(f"invalid matrix {where}")
    return np.triu(r)


class SpdSurrogate:
    """Interpolant of the Cholesky factor entries; ``E(x) = R(x)^T R(x)``."""

    def __init__(self, factor: Interpolant, m: int):
        self.factor = factor
        self.m = m
        self._rows, self._cols = _upper_indices(m)

    def _assemble(self, entries: np.ndarray) -> np.ndarray:
        r = np.zeros(entries.shape[:-1] + (self.m, self.m))
        r[..., self._rows, self._cols] = entries
        return r

    def factor_at(self, x) -> np.ndarray:
        return self._assemble(np.asarray(self.factor.evaluate(x)))

    def evaluate(self, x) -> np.ndarray:
        r = self.factor_at(x)
        return np.swapaxes(r, -1, -2) @ r

    def derivative(self, x, t: int) -> np.ndarray:
        r = self.factor_at(x)
        g = np.asarray(self.factor.gradient(x))
        dr = self._assemble(g[..., t, :])
        prod = np.swapaxes(r, -1, -2) @ dr
        return prod + np.swapaxes(prod, -1, -2)


def _matrix_samples(grid: SparseGrid, spec, samples) -> np.ndarray:
    if callable(samples):
        pts = grid_coordinates(as_tensor_spec(spec, grid.dim), grid.levels, grid.indices)
        out = np.array([np.asarray(samples(x), dtype=float) for x in pts])
    else:
        out = np.asarray(samples, dtype=float)
    if out.ndim != 3 or out.shape[0] != len(grid) or out.shape[1] != out.shape[2]:
        raise DomainError("samples must have shape (grid points, m, m)")
    return out


def build_spd_surrogate(grid: SparseGrid, spec, samples: np.ndarray | Callable) -> SpdSurrogate:
    """Factor each SPD sample and interpolate the upper Cholesky entries on one grid."""
    mats = _matrix_samples(grid, spec, samples)
    m = mats.shape[1]
    rows, cols = _upper_indices(m)
    entries = np.empty((len(grid), len(rows)))
    for k, e in enumerate(mats):
        if not np.allclose(e, e.T, rtol=1e-12, atol=1e-14 * max(np.abs(e).max(), 1.0)):
            raise DomainError(f"sample at grid point {grid[k]} is not symmetric")
        entries[k] = cholesky_upper(e, f"at grid point {grid[k]}")[rows, cols]
    return SpdSurrogate(Interpolant.from_values(grid, spec, entries), m)


def spd_evaluate(s: SpdSurrogate, x) -> np.ndarray:
    return s.evaluate(x)


def spd_derivative(s: SpdSurrogate, x, t: int) -> np.ndarray:
    return s.derivative(x, t)


class EntrywiseMatrixSurrogate:
    """Direct interpolation of the upper matrix entries (no definiteness guarantee)."""

    def __init__(self, grid: SparseGrid, spec, samples):
        mats = _matrix_samples(grid, spec, samples)
        self.m = mats.shape[1]
        self._rows, self._cols = _upper_indices(self.m)
        self.entries = Interpolant.from_values(grid, spec, mats[:, self._rows, self._cols])

    def evaluate(self, x) -> np.ndarray:
        vals = np.asarray(self.entries.evaluate(x))
        e = np.zeros(vals.shape[:-1] + (self.m, self.m))
        e[..., self._rows, self._cols] = vals
        e[..., self._cols, self._rows] = vals
        return e
