"""Hermite hierarchization for weakly fundamental bases."""

from __future__ import annotations

from functools import lru_cache, partial
from math import factorial
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from ..basis.families import WEAKLY_FUNDAMENTAL, BasisSpec, as_tensor_spec
from ..basis.fundamental import weakly_fundamental_coefficients
from ..exceptions import DomainError
from ..grid import SparseGrid
from .unidirectional import Signature, pole_matrix, unidirectional_principle


@lru_cache(maxsize=None)
def midpoint_hermite_weights(p: int) -> np.ndarray:
    """Weights mapping endpoint data to midpoint derivatives of the Hermite interpolant.

    On ``s in [-1, 1]`` the data are ``s``-derivatives of orders ``0..m``
    (``m = (p-1)/2``) at ``-1`` then at ``+1``; row ``q`` of the result gives the
    ``q``-th derivative at ``s = 0``.
    """
    m = (p - 1) // 2
    rows = []
    for s0 in (-1.0, 1.0):
        for q in range(m + 1):
            row = [factorial(k) / factorial(k - q) * s0 ** (k - q) if k >= q else 0.0 for k in range(p + 1)]
            rows.append(row)
    inv = np.linalg.inv(np.array(rows))
    return np.array([factorial(q) * inv[q] for q in range(m + 1)])


@lru_cache(maxsize=None)
def _wfs_kernel(p: int) -> tuple[np.ndarray, np.ndarray]:
    """``phi^wfs`` derivatives of orders 0..(p-1)/2 at integers ``-(p-1)..p-1``."""
    c = weakly_fundamental_coefficients(p)
    ints = np.arange(-(p - 1), p)
    kern = np.array([c.evaluate(ints.astype(float), q) for q in range((p - 1) // 2 + 1)])
    return ints, kern


def _regular_level(sig: Signature) -> int | None:
    """Level n if the 1-D signature is the complete regular grid of level n."""
    n = max(l for l, _ in sig)
    if len(sig) == (1 << n) + 1 and (0, 0) in sig and (0, 1) in sig:
        return n
    return None


def hermite_regular(p: int, n: int, f: np.ndarray) -> np.ndarray:
    """Hermite hierarchization of complete regular 1-D data for uniform wfs splines.

    ``f`` has shape (2^n + 1, batch) with rows in canonical level order
    (level 0: index 0, 1; then odd indices of each level). Returns surpluses
    in the same layout.
    """
    m = (p - 1) // 2
    y = np.empty_like(f)
    y[:2] = f[:2]
    batch = f.shape[1]
    deriv = np.zeros((m + 1, batch, 2))
    deriv[0] = f[:2].T
    if m >= 1:
        deriv[1] = (f[1] - f[0])[:, None]
    weights = midpoint_hermite_weights(p)
    ints, kern = _wfs_kernel(p)
    half_band = m
    band_vals = kern[0][(ints % 2 == 0)]
    band_ints = ints[(ints % 2 == 0)] // 2
    row = 2
    for level in range(1, n + 1):
        h = 2.0 ** -level
        size = 1 << (level - 1)
        scale = h ** np.arange(m + 1)
        left = deriv[:, :, :-1] * scale[:, None, None]
        right = deriv[:, :, 1:] * scale[:, None, None]
        data = np.concatenate([left, right], axis=0)  # (2m+2, batch, size)
        mid = np.einsum("qk,kbs->qbs", weights, data) / scale[:, None, None]
        fl = f[row:row + size]  # (size, batch)
        resid = fl - mid[0].T
        ab = np.zeros((2 * half_band + 1, size))
        for off, val in zip(band_ints, band_vals):
            ab[half_band - off, max(off, 0):size + min(off, 0)] = val
        sol = solve_banded((half_band, half_band), ab, resid) if half_band else resid / band_vals[0]
        y[row:row + size] = sol
        row += size
        # derivatives of f_l at all level-l points
        new = np.empty((m + 1, batch, 2 * size + 1))
        new[:, :, 0::2] = deriv
        new[:, :, 1::2] = mid
        z = np.zeros((batch, 2 * size + 1))
        z[:, 1::2] = sol.T
        for q in range(m + 1):
            acc = np.zeros_like(z)
            for s, kv in zip(ints, kern[q]):
                if kv == 0.0 or abs(s) >= z.shape[1]:
                    continue
                if s >= 0:
                    acc[:, s:] += kv * z[:, : z.shape[1] - s]
                else:
                    acc[:, :s] += kv * z[:, -s:]
            new[q] += acc * h ** (-q)
        deriv = new
    return y


def _canonical_order(sig: Signature) -> np.ndarray:
    return np.array(sorted(range(len(sig)), key=lambda k: (sig[k][0], sig[k][1])))


def _check_parents(sig: Signature) -> None:
    present = set(sig)
    for l, i in sig:
        if l == 0:
            continue
        if l == 1:
            parents = [(0, 0), (0, 1)]
        else:
            j = (i + 1) // 2 if ((i + 1) // 2) % 2 == 1 else (i - 1) // 2
            parents = [(l - 1, j)]
        for q in parents:
            if q not in present:
                raise DomainError(f"point ({l}, {i}) lacks its parent {q}")


def hermite_blocks(spec: BasisSpec, sig: Signature, values: np.ndarray, check_parents: bool = False) -> np.ndarray:
    """Level-by-level block forward substitution (adaptive grids, any weakly fundamental basis).

    Exact because weakly fundamental functions vanish at all coarser-level points.
    """
    if check_parents:
        _check_parents(sig)
    a = pole_matrix(spec, sig)
    lv = np.array([s[0] for s in sig])
    y = np.zeros_like(values)
    r = values.copy()
    for level in np.unique(lv):
        rows = np.nonzero(lv == level)[0]
        y[rows] = np.linalg.solve(a[np.ix_(rows, rows)], r[rows])
        r -= a[:, rows] @ y[rows]
    return y


def hermite_pole(spec: BasisSpec, sig: Signature, values: np.ndarray, check_parents: bool = False) -> np.ndarray:
    """1-D Hermite hierarchization operator for use inside the unidirectional principle.

    Poles of multivariate adaptive grids may lack 1-D parents, so the parent
    check is only enforced on genuinely one-dimensional grids.
    """
    if spec.family not in WEAKLY_FUNDAMENTAL:
        raise DomainError(f"Hermite hierarchization needs a weakly fundamental basis, got {spec}")
    n = _regular_level(sig)
    if spec.family == "weakly-fundamental" and n is not None:
        perm = _canonical_order(sig)
        out = np.empty_like(values)
        out[perm] = hermite_regular(spec.degree, n, values[perm])
        return out
    return hermite_blocks(spec, sig, values, check_parents)


def hierarchize_hermite(grid: SparseGrid, spec, values, order: Sequence[int] | None = None) -> np.ndarray:
    """Hermite hierarchization (1-D operator applied pole-wise in higher dimensions)."""
    specs = as_tensor_spec(spec, grid.dim)
    for s in specs:
        if s.family not in WEAKLY_FUNDAMENTAL:
            raise DomainError(f"Hermite hierarchization needs a weakly fundamental basis, got {s}")
    operator = partial(hermite_pole, check_parents=grid.dim == 1)
    return unidirectional_principle(grid, specs, values, order, operator=operator)
