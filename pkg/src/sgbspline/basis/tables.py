"""Piecewise-polynomial fast path for basis evaluation.

Each 1-D basis function of level ``l`` is a polynomial of degree <= p on every
cell of the level-``l`` partition (uniform points ``k 2^-l`` or Chebyshev
points). The cell polynomials are computed exactly from the primitive
combinations with a polynomial-valued Cox-de Boor recurrence, stored in the
local variable ``u in [0, 1]`` of the cell, and evaluated by Horner's scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial

from ..exceptions import DomainError
from .bspline import grid_point, knot_count, knot_offset, knot_values
from .families import BasisSpec, Combination, as_tensor_spec, combination, primitive_knots, primitive_range


# -- primitive cell tables --------------------------------------------------------

@dataclass(frozen=True)
class PrimitiveTable:
    """Cell polynomials of all primitives of one kind and level.

    ``coeffs[j - first, s]`` is the polynomial of primitive ``j`` on cell
    ``start[j - first] + s`` (zero-padded to a common span).
    """

    first: int
    start: np.ndarray
    coeffs: np.ndarray

    @property
    def span(self) -> int:
        return self.coeffs.shape[1]


def _mul_linear(poly: np.ndarray, c0: np.ndarray, c1: np.ndarray) -> np.ndarray:
    """Multiply polynomials (..., n) by ``c0 + c1 u`` with per-cell constants."""
    out = c0[:, None] * poly
    out[:, 1:] += c1[:, None] * poly[:, :-1]
    return out


def _bspline_cells(knots: np.ndarray, p: int, a: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polynomials (in u, x = a + w u) of the p+1 B-splines nonzero on each cell.

    Returns the knot index ``mu`` of each cell and an array of shape
    (cells, p+1, p+1) whose entry ``[k, s]`` belongs to B-spline ``mu_k - p + s``.
    """
    ncell = len(a)
    mu = np.searchsorted(knots, a + 0.5 * w, side="right") - 1
    prev = [np.zeros((ncell, p + 1))]
    prev[0][:, 0] = 1.0
    for r in range(1, p + 1):
        cur = []
        for s in range(r + 1):
            j = mu - r + s
            poly = np.zeros((ncell, p + 1))
            if s >= 1:
                d = knots[j + r] - knots[j]
                poly += _mul_linear(prev[s - 1], (a - knots[j]) / d, w / d)
            if s <= r - 1:
                d = knots[j + r + 1] - knots[j + 1]
                poly += _mul_linear(prev[s], (knots[j + r + 1] - a) / d, -w / d)
            cur.append(poly)
        prev = cur
    return mu, np.stack(prev, axis=1)


def partition(level: int, chebyshev: bool) -> np.ndarray:
    """Breakpoints of the level-``l`` cells."""
    return grid_point(level, np.arange((1 << level) + 1), chebyshev)


@lru_cache(maxsize=None)
def primitive_table(kind: str, level: int, p: int) -> PrimitiveTable:
    if kind == "const":
        coeffs = np.zeros((1, 1, p + 1))
        coeffs[0, 0, 0] = 1.0
        return PrimitiveTable(0, np.zeros(1, dtype=np.int64), coeffs)
    cheb = kind in ("cc", "cc-nak", "lagrange-cc")
    bp = partition(level, cheb)
    a, w = bp[:-1], np.diff(bp)
    ncell = len(a)
    rng = primitive_range(kind, level, p)
    if kind in ("lagrange", "lagrange-cc"):
        coeffs = np.zeros((len(rng), ncell, p + 1))
        for j in rng:
            others = np.delete(bp, j)
            poly = Polynomial.fromroots(others) / np.prod(bp[j] - others)
            for k in range(ncell):
                c = poly(Polynomial([a[k], w[k]])).coef
                coeffs[j, k, :len(c)] = c
        return PrimitiveTable(0, np.zeros(len(rng), dtype=np.int64), coeffs)
    knots = primitive_knots(kind, level, p)
    mu, cells = _bspline_cells(knots, p, a, w)
    offset = knot_offset(kind, p)
    prim = (mu[:, None] - p + np.arange(p + 1)[None, :]) + offset
    cell = np.broadcast_to(np.arange(ncell)[:, None], prim.shape)
    prim, cell, polys = prim.ravel(), cell.ravel(), cells.reshape(-1, p + 1)
    keep = (prim >= rng.start) & (prim < rng.stop)
    prim, cell, polys = prim[keep], cell[keep], polys[keep]
    local = prim - rng.start
    n = len(rng)
    start = np.full(n, ncell, dtype=np.int64)
    np.minimum.at(start, local, cell)
    stop = np.zeros(n, dtype=np.int64)
    np.maximum.at(stop, local, cell + 1)
    start = np.minimum(start, stop)
    span = int(max((stop - start).max(), 1))
    coeffs = np.zeros((n, span, p + 1))
    coeffs[local, cell - start[local]] = polys
    return PrimitiveTable(rng.start, start, coeffs)


# -- per-function cell polynomials ------------------------------------------------

@dataclass(frozen=True)
class PiecewisePolynomial:
    """Cell polynomials ``coeffs[k - k0]`` on cells ``k0 .. k0 + n - 1`` of a partition level."""

    chebyshev: bool
    partition_level: int
    k0: int
    coeffs: np.ndarray


def _cell_index(level: int, x: float, chebyshev: bool) -> int:
    """Index of the level-``l`` breakpoint at ``x`` (which must be a breakpoint)."""
    if chebyshev:
        x = np.arccos(np.clip(1.0 - 2.0 * x, -1.0, 1.0)) / np.pi
    return int(round(x * (1 << level)))


def _spline_piecewise(comb: Combination, chebyshev: bool) -> PiecewisePolynomial:
    """Cell polynomials of a B-spline combination on the cells of its support only."""
    kind, level, p = comb.kind, comb.level, comb.degree
    cheb = kind in ("cc", "cc-nak")
    offset = knot_offset(kind, p)
    first = np.array([j for j, _ in comb.coeffs]) - offset  # first knot of each primitive
    lo_k = max(int(first.min()) - p - 1, 0)
    hi_k = min(int(first.max()) + 2 * p + 3, knot_count(kind, level, p))
    knots = knot_values(kind, level, p, np.arange(lo_k, hi_k))
    xlo = max(float(knots[first.min() - lo_k]), 0.0)
    xhi = min(float(knots[first.max() + p + 1 - lo_k]), 1.0)
    c_lo, c_hi = _cell_index(level, xlo, cheb), _cell_index(level, xhi, cheb)
    if c_hi <= c_lo:
        return PiecewisePolynomial(chebyshev, level, 0, np.zeros((1, p + 1)))
    bp = grid_point(level, np.arange(c_lo, c_hi + 1), cheb)
    a, w = bp[:-1], np.diff(bp)
    mu, cells = _bspline_cells(knots, p, a, w)
    prim = mu[:, None] - p + np.arange(p + 1)[None, :] + lo_k + offset
    weight = dict(comb.coeffs)
    wmat = np.vectorize(lambda j: weight.get(int(j), 0.0), otypes=[float])(prim)
    out = np.einsum("ks,ksc->kc", wmat, cells)
    return PiecewisePolynomial(chebyshev, level, c_lo, out)


def piecewise_from_combination(comb: Combination, chebyshev: bool) -> PiecewisePolynomial:
    p = comb.degree
    if comb.coeffs and comb.kind in ("uniform", "cc", "nak", "cc-nak"):
        return _spline_piecewise(comb, chebyshev)
    table = primitive_table(comb.kind, comb.level, p)
    part_level = 0 if comb.kind == "const" else comb.level
    if not comb.coeffs:
        return PiecewisePolynomial(chebyshev, part_level, 0, np.zeros((1, p + 1)))
    js = np.array([j for j, _ in comb.coeffs]) - table.first
    cs = np.array([c for _, c in comb.coeffs])
    starts = table.start[js]
    k0 = int(starts.min())
    k1 = int(starts.max()) + table.span
    k1 = min(k1, 1 << part_level)
    out = np.zeros((k1 - k0 + table.span, p + 1))
    rows = (starts - k0)[:, None] + np.arange(table.span)[None, :]
    np.add.at(out, rows, cs[:, None, None] * table.coeffs[js])
    return PiecewisePolynomial(chebyshev, part_level, k0, out[:k1 - k0])


@lru_cache(maxsize=None)
def piecewise(spec: BasisSpec, level: int, index: int) -> PiecewisePolynomial:
    """Cached cell polynomials of one 1-D basis function."""
    comb = combination(spec.family, spec.degree, int(level), int(index))
    return piecewise_from_combination(comb, spec.chebyshev)


def _derivative_coeffs(coeffs: np.ndarray, q: int) -> np.ndarray:
    """Coefficients of the q-th u-derivative (same trailing length, zero padded)."""
    if q == 0:
        return coeffs
    n = coeffs.shape[-1]
    out = np.zeros_like(coeffs)
    if q >= n:
        return out
    m = np.arange(n - q)
    factor = np.ones(n - q)
    for r in range(q):
        factor *= m + q - r
    out[..., : n - q] = coeffs[..., q:] * factor
    return out


class FunctionTable:
    """Vectorised evaluation of a list of 1-D functions of one basis spec."""

    CHUNK = 1 << 22

    def __init__(self, spec: BasisSpec, levels: Sequence[int], indices: Sequence[int]):
        self.spec = spec
        self.degree = spec.degree
        pieces = [piecewise(spec, int(l), int(i)) for l, i in zip(levels, indices)]
        self.size = len(pieces)
        self.part_level = np.array([pp.partition_level for pp in pieces], dtype=np.int64)
        self.k0 = np.array([pp.k0 for pp in pieces], dtype=np.int64)
        self.ncell = np.array([len(pp.coeffs) for pp in pieces], dtype=np.int64)
        self.offset = np.concatenate([[0], np.cumsum(self.ncell)[:-1]]).astype(np.int64)
        if pieces:
            self.coeffs = np.concatenate([pp.coeffs for pp in pieces], axis=0)
        else:
            self.coeffs = np.zeros((0, self.degree + 1))
        self._deriv_cache: dict[int, np.ndarray] = {0: self.coeffs}

    def _coeffs(self, q: int) -> np.ndarray:
        if q not in self._deriv_cache:
            self._deriv_cache[q] = _derivative_coeffs(self.coeffs, q)
        return self._deriv_cache[q]

    def evaluate(self, x, q: int = 0) -> np.ndarray:
        """Values (q-th derivatives) of all functions at ``x``; shape (functions, points)."""
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty((self.size, len(xa)))
        if self.size == 0 or len(xa) == 0:
            return out
        chunk = max(1, self.CHUNK // max(1, self.size * (self.degree + 1)))
        for lo in range(0, len(xa), chunk):
            out[:, lo:lo + chunk] = self._evaluate(xa[lo:lo + chunk], q)
        return out

    def _evaluate(self, x: np.ndarray, q: int) -> np.ndarray:
        scale = np.ldexp(1.0, self.part_level)[:, None]
        cells = (1 << self.part_level)[:, None]
        if self.spec.chebyshev:
            s = np.arccos(np.clip(1.0 - 2.0 * x, -1.0, 1.0)) / np.pi
            k = np.clip(np.floor(s[None, :] * scale).astype(np.int64), 0, cells - 1)
            a = (1.0 - np.cos(np.pi * k / scale)) / 2.0
            b = (1.0 - np.cos(np.pi * (k + 1) / scale)) / 2.0
            width = b - a
            u = (x[None, :] - a) / width
        else:
            t = x[None, :] * scale
            k = np.clip(np.floor(t).astype(np.int64), 0, cells - 1)
            u = t - k
            width = None
        rel = k - self.k0[:, None]
        inside = (rel >= 0) & (rel < self.ncell[:, None])
        idx = self.offset[:, None] + np.clip(rel, 0, self.ncell[:, None] - 1)
        coeffs = self._coeffs(q)[idx]
        val = coeffs[..., -1]
        for m in range(self.degree - 1, -1, -1):
            val = val * u + coeffs[..., m]
        val = np.where(inside, val, 0.0)
        if q:
            val = val * (scale ** q if width is None else width ** (-q))
        return val


# -- tensor products -------------------------------------------------------------

class TensorBasis:
    """Evaluation of tensor-product basis functions of a grid.

    The 1-D factors are evaluated once per distinct (level, index) pair per
    dimension and combined by gather-products.
    """

    CHUNK = 1 << 22

    def __init__(self, spec, levels: np.ndarray, indices: np.ndarray):
        levels = np.asarray(levels, dtype=np.int64)
        indices = np.asarray(indices, dtype=np.int64)
        if levels.ndim != 2:
            raise DomainError("levels must have shape (N, d)")
        self.size, self.dim = levels.shape
        self.spec = as_tensor_spec(spec, self.dim)
        self.tables: list[FunctionTable] = []
        self.ids: list[np.ndarray] = []
        for t in range(self.dim):
            pairs = np.stack([levels[:, t], indices[:, t]], axis=1)
            uniq, inv = np.unique(pairs, axis=0, return_inverse=True) if len(pairs) else (pairs, np.zeros(0, dtype=np.int64))
            self.tables.append(FunctionTable(self.spec[t], uniq[:, 0], uniq[:, 1]))
            self.ids.append(np.asarray(inv).ravel())

    @classmethod
    def for_grid(cls, spec, grid) -> "TensorBasis":
        return cls(spec, grid.levels, grid.indices)

    def _factors(self, x: np.ndarray, orders: set[tuple[int, int]]) -> dict[tuple[int, int], np.ndarray]:
        return {(t, q): self.tables[t].evaluate(x[:, t], q)[self.ids[t]] for t, q in orders}

    def _chunks(self, npts: int):
        step = max(1, self.CHUNK // max(1, self.size * max(self.dim, 1)))
        for lo in range(0, npts, step):
            yield slice(lo, min(lo + step, npts))

    def _as_points(self, x) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        if xa.ndim == 1:
            xa = xa[None, :]
        if xa.shape[1] != self.dim:
            raise DomainError(f"points must have {self.dim} columns")
        return xa

    def matrix(self, x, orders: Sequence[int] | None = None) -> np.ndarray:
        """Matrix ``A[r, c] = phi_c(x_r)`` (or the mixed derivative given by ``orders``)."""
        xa = self._as_points(x)
        orders = tuple(orders) if orders is not None else (0,) * self.dim
        out = np.empty((len(xa), self.size))
        for sl in self._chunks(len(xa)):
            xs = xa[sl]
            prod = np.ones((self.size, len(xs)))
            for t in range(self.dim):
                prod *= self.tables[t].evaluate(xs[:, t], orders[t])[self.ids[t]]
            out[sl] = prod.T
        return out

    def evaluate(self, coeffs, x) -> np.ndarray:
        """``sum_c coeffs[c] phi_c(x)`` for each row of ``x`` (coeffs may be (N, m))."""
        return self._contract(coeffs, x, [(0,) * self.dim])[0]

    def gradient(self, coeffs, x) -> np.ndarray:
        """Gradients, shape (points, d) or (points, d, m)."""
        orders = [tuple(1 if t == s else 0 for t in range(self.dim)) for s in range(self.dim)]
        res = self._contract(coeffs, x, orders)
        return np.stack(res, axis=1)

    def hessian(self, coeffs, x) -> np.ndarray:
        """Hessians, shape (points, d, d) or (points, d, d, m)."""
        d = self.dim
        pairs = [(s, r) for s in range(d) for r in range(s, d)]
        orders = []
        for s, r in pairs:
            o = [0] * d
            o[s] += 1
            o[r] += 1
            orders.append(tuple(o))
        res = self._contract(coeffs, x, orders)
        shape = res[0].shape
        out = np.empty((shape[0], d, d) + shape[1:])
        for (s, r), v in zip(pairs, res):
            out[:, s, r] = v
            out[:, r, s] = v
        return out

    def _contract(self, coeffs, x, orders: list[tuple[int, ...]]) -> list[np.ndarray]:
        xa = self._as_points(x)
        c = np.asarray(coeffs, dtype=float)
        if c.shape[0] != self.size:
            raise DomainError(f"expected {self.size} coefficients, got {c.shape[0]}")
        needed = {(t, o[t]) for o in orders for t in range(self.dim)}
        results = [np.empty((len(xa),) + c.shape[1:]) for _ in orders]
        for sl in self._chunks(len(xa)):
            fac = self._factors(xa[sl], needed)
            for r, o in enumerate(orders):
                prod = fac[(0, o[0])].copy()
                for t in range(1, self.dim):
                    prod *= fac[(t, o[t])]
                results[r][sl] = prod.T @ c
        return results


def grid_coordinates(spec, levels: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Coordinates of level-index pairs (shape (N, d)) under the given basis specs."""
    levels = np.asarray(levels, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    specs = as_tensor_spec(spec, levels.shape[1])
    out = indices * np.ldexp(1.0, -levels)
    for t, s in enumerate(specs):
        if s.chebyshev:
            col = (1.0 - np.cos(np.pi * out[:, t])) / 2.0
            col[out[:, t] == 0.5] = 0.5
            col[out[:, t] == 1.0] = 1.0
            out[:, t] = col
    return out
