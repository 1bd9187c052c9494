"""Pointwise B-spline and Lagrange evaluation (the reference path).

All functions are vectorised over ``x``. Knot intervals are half-open,
``[xi_k, xi_{k+1})``, so values at knots are right limits.
"""

from __future__ import annotations

from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from ..exceptions import DomainError


def cardinal_bspline(p: int, x) -> np.ndarray | float:
    """Cardinal B-spline ``b^p`` with support ``[0, p + 1]``."""
    if p < 0:
        raise DomainError("degree must be non-negative")
    xa = np.asarray(x, dtype=float)
    # N_j holds b^r(x - j) for j = 0..p-r
    n = [((xa >= j) & (xa < j + 1)).astype(float) for j in range(p + 1)]
    for r in range(1, p + 1):
        n = [
            ((xa - j) * n[j] + (j + r + 1 - xa) * n[j + 1]) / r
            for j in range(p + 1 - r)
        ]
    out = n[0]
    return float(out) if np.ndim(x) == 0 else out


def cardinal_bspline_derivative(p: int, q: int, x) -> np.ndarray | float:
    """q-th derivative of ``b^p`` by repeated application of the difference rule.

    For ``q >= p`` the derivative is piecewise constant (or a sum of
    characteristic functions) and the right limit is returned at knots.
    """
    if q < 0:
        raise DomainError("derivative order must be non-negative")
    if q == 0:
        return cardinal_bspline(p, x)
    xa = np.asarray(x, dtype=float)
    if q > p:
        out = np.zeros_like(xa)
    else:
        out = sum((-1) ** j * comb(q, j) * cardinal_bspline(p - q, xa - j) for j in range(q + 1))
    return float(out) if np.ndim(x) == 0 else out


def _local_bspline(knots: np.ndarray, x: np.ndarray, q: int) -> np.ndarray:
    """q-th derivative of the single B-spline on ``len(knots) - 2`` degree."""
    p = len(knots) - 2
    if q > p:
        return np.zeros_like(x)
    if q > 0:
        left = knots[p] - knots[0]
        right = knots[p + 1] - knots[1]
        out = np.zeros_like(x)
        if left > 0:
            out += p / left * _local_bspline(knots[:-1], x, q - 1)
        if right > 0:
            out -= p / right * _local_bspline(knots[1:], x, q - 1)
        return out
    n = [((x >= knots[j]) & (x < knots[j + 1])).astype(float) for j in range(p + 1)]
    for r in range(1, p + 1):
        nxt = []
        for j in range(p + 1 - r):
            val = np.zeros_like(x)
            d1 = knots[j + r] - knots[j]
            d2 = knots[j + r + 1] - knots[j + 1]
            if d1 > 0:
                val += (x - knots[j]) / d1 * n[j]
            if d2 > 0:
                val += (knots[j + r + 1] - x) / d2 * n[j + 1]
            nxt.append(val)
        n = nxt
    return n[0]


def nonuniform_bspline(knots, k: int, p: int, x, q: int = 0) -> np.ndarray | float:
    """B-spline ``b^p_{k, xi}`` (or its q-th derivative) via the Cox-de Boor recurrence."""
    xi = np.asarray(knots, dtype=float)
    if k < 0 or k + p + 1 >= len(xi):
        raise DomainError(f"B-spline index {k} out of range for {len(xi)} knots and degree {p}")
    if np.any(np.diff(xi[k:k + p + 2]) < 0):
        raise DomainError("knots must be non-decreasing")
    xa = np.asarray(x, dtype=float)
    out = _local_bspline(xi[k:k + p + 2], xa, q)
    return float(out) if np.ndim(x) == 0 else out


def lagrange_polynomial(nodes, j: int, x, q: int = 0) -> np.ndarray | float:
    """Lagrange polynomial for node ``j``; barycentric values, monomial derivatives."""
    nodes = np.asarray(nodes, dtype=float)
    xa = np.asarray(x, dtype=float)
    m = len(nodes)
    if q > 0:
        others = np.delete(nodes, j)
        poly = Polynomial.fromroots(others) / np.prod(nodes[j] - others)
        out = poly.deriv(q)(xa) if q <= m - 1 else np.zeros_like(xa)
        return float(out) if np.ndim(x) == 0 else np.asarray(out, dtype=float)
    w = np.array([1.0 / np.prod(nodes[k] - np.delete(nodes, k)) for k in range(m)])
    flat = np.atleast_1d(xa).ravel()
    diff = flat[:, None] - nodes[None, :]
    exact = diff == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = w[None, :] / diff
        out = terms[:, j] / terms.sum(axis=1)
    hit = exact.any(axis=1)
    out[hit] = exact[hit, j].astype(float)
    out = out.reshape(np.shape(xa))
    return float(out) if np.ndim(x) == 0 else out


def chebyshev_point(level: int, index) -> np.ndarray | float:
    """Clenshaw-Curtis point ``(1 - cos(pi i 2^-l)) / 2``."""
    ia = np.asarray(index)
    if np.any(ia < 0) or np.any(ia > (1 << level)):
        raise DomainError("Chebyshev index out of range")
    out = (1.0 - np.cos(np.pi * ia / (1 << level))) / 2.0
    # exact symmetric endpoints and midpoint
    out = np.where(ia == 0, 0.0, np.where(ia == (1 << level), 1.0, np.where(2 * ia == (1 << level), 0.5, out)))
    return float(out) if np.ndim(index) == 0 else out


def extended_chebyshev_point(level: int, m) -> np.ndarray:
    """Chebyshev points continued uniformly outside ``[0, 1]`` with step ``x^cc_{l,1}``."""
    ma = np.asarray(m, dtype=np.int64)
    top = 1 << level
    step = chebyshev_point(level, 1)
    inner = chebyshev_point(level, np.clip(ma, 0, top))
    return np.where(ma < 0, ma * step, np.where(ma > top, 1.0 + (ma - top) * step, inner))


def grid_point(level: int, m, chebyshev: bool) -> np.ndarray:
    """Level grid points ``m 2^-l`` (any integer m), or their Clenshaw-Curtis analogue."""
    if chebyshev:
        return extended_chebyshev_point(level, m)
    return np.asarray(m, dtype=float) / (1 << level)


def min_spline_level(p: int) -> int:
    """Smallest level at which not-a-knot knots exist, ``ceil(log2(p + 1))``."""
    return int(p).bit_length() if p > 0 else 0


def knot_count(kind: str, level: int, p: int) -> int:
    """Length of the knot sequence returned by :func:`build_knots`."""
    top = 1 << level
    return top + 2 * p + 1 if kind in ("uniform", "cc") else top + p + 2


def knot_values(kind: str, level: int, p: int, k) -> np.ndarray:
    """Entries ``k`` (integer array) of the knot sequence of :func:`build_knots`."""
    if p % 2 == 0 or p < 1:
        raise DomainError("only odd positive degrees are supported")
    cheb = kind.startswith("cc")
    top = 1 << level
    half = (p + 1) // 2
    k = np.asarray(k, dtype=np.int64)
    if kind in ("uniform", "cc"):
        m = k - (p - 1) // 2 - half
    elif kind in ("nak", "cc-nak"):
        if level < min_spline_level(p):
            raise DomainError(
                f"not-a-knot knots need level >= {min_spline_level(p)} for degree {p}"
            )
        m = np.where(k <= p, k - p, np.where(k <= top, k - half, k - 1))
    else:
        raise DomainError(f"unknown knot kind {kind!r}")
    return grid_point(level, m, cheb)


def build_knots(kind: str, level: int, p: int) -> np.ndarray:
    """Knot sequence of the level-``l`` B-spline family of the given kind.

    ``uniform`` and ``cc`` return the knots of the B-splines with indices
    ``-(p-1)/2 .. 2^l + (p-1)/2`` (those not vanishing on [0, 1]);
    ``nak`` and ``cc-nak`` return the ``2^l + p + 2`` not-a-knot knots.
    """
    if kind not in ("uniform", "cc", "nak", "cc-nak"):
        raise DomainError(f"unknown knot kind {kind!r}")
    return knot_values(kind, level, p, np.arange(knot_count(kind, level, p)))


def knot_offset(kind: str, p: int) -> int:
    """Index of the first B-spline of ``build_knots(kind, ...)`` in basis numbering."""
    return -(p - 1) // 2 if kind in ("uniform", "cc") else 0
