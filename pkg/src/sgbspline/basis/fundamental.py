"""Coefficients of fundamental, modified fundamental and weakly fundamental splines.

All three are combinations ``sum_k c_k phi^p(x - k)`` of shifted centred
cardinal B-splines ``phi^p(x) = b^p(x + (p+1)/2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.linalg import solve, solve_banded

from ..exceptions import DomainError
from .bspline import cardinal_bspline, cardinal_bspline_derivative


def centred_bspline(p: int, x, q: int = 0):
    """``phi^p(x) = b^p(x + (p+1)/2)`` or its q-th derivative."""
    return cardinal_bspline_derivative(p, q, np.asarray(x, dtype=float) + (p + 1) / 2)


@dataclass(frozen=True)
class FundamentalCoefficients:
    """Coefficients ``c_k`` for ``k = k_min .. k_min + len(values) - 1``."""

    degree: int
    k_min: int
    values: np.ndarray
    truncation: int
    variant: str

    @property
    def k_max(self) -> int:
        return self.k_min + len(self.values) - 1

    @property
    def ks(self) -> np.ndarray:
        return np.arange(self.k_min, self.k_max + 1)

    def __getitem__(self, k: int) -> float:
        if self.k_min <= k <= self.k_max:
            return float(self.values[k - self.k_min])
        return 0.0

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(c) for k, c in zip(self.ks, self.values)}

    def evaluate(self, x, q: int = 0) -> np.ndarray:
        """Parent function ``sum_k c_k phi^p(x - k)`` (q-th derivative)."""
        xa = np.asarray(x, dtype=float)
        return sum(c * centred_bspline(self.degree, xa - k, q) for k, c in zip(self.ks, self.values))

    def to_csv(self, path: str | Path) -> None:
        rows = ["p,k,c"] + [f"{self.degree},{k},{c:.17g}" for k, c in zip(self.ks, self.values)]
        Path(path).write_text("\n".join(rows) + "\n")


def _check_degree(p: int) -> None:
    if p < 1 or p % 2 == 0:
        raise DomainError(f"degree must be odd and positive, got {p}")


def _truncation_index(c: np.ndarray, threshold: float) -> int:
    """Smallest n with |c[k]| < threshold for all k >= n (c indexed from 0)."""
    big = np.nonzero(np.abs(c) >= threshold)[0]
    return int(big[-1]) + 1 if len(big) else 0


@lru_cache(maxsize=None)
def _fundamental_cached(p: int, threshold: float) -> FundamentalCoefficients:
    half = (p - 1) // 2
    if p == 1:
        return FundamentalCoefficients(1, 0, np.array([1.0]), 1, "fundamental")
    # large symmetric truncation: the true coefficients decay geometrically,
    # so the central entries of this solution are accurate to machine precision
    size = 401
    centre = size // 2
    band = np.array([cardinal_bspline(p, (p + 1) / 2 + j) for j in range(-half, half + 1)])
    ab = np.zeros((2 * half + 1, size))
    for row, j in enumerate(range(half, -half - 1, -1)):
        ab[row, :] = band[j + half]
    rhs = np.zeros(size)
    rhs[centre] = 1.0
    c = solve_banded((half, half), ab, rhs)
    tail = np.abs(c[centre:])
    n_p = max(_truncation_index(tail, threshold), 1)
    return FundamentalCoefficients(p, -(n_p - 1), c[centre - n_p + 1:centre + n_p].copy(), n_p, "fundamental")


def fundamental_coefficients(p: int, threshold: float = 1e-10) -> FundamentalCoefficients:
    """Coefficients of the fundamental spline, truncated to ``|k| < n_p``.

    ``n_p`` is the smallest n such that every dropped coefficient is below
    ``threshold`` in magnitude.
    """
    _check_degree(p)
    if threshold <= 0:
        raise DomainError("threshold must be positive")
    return _fundamental_cached(p, float(threshold))


@lru_cache(maxsize=None)
def _modified_cached(p: int, threshold: float) -> FundamentalCoefficients:
    if p == 1:
        # max(2 - x, 0) on x >= 0
        return FundamentalCoefficients(1, 0, np.array([2.0, 1.0]), 2, "modified-fundamental")
    half = (p + 1) // 2
    k_min = 1 - half
    big_k = 200
    ks = np.arange(k_min, big_k + 1)
    rows = []
    rhs = []
    for i in range(1, big_k + 1):
        rows.append(centred_bspline(p, i - ks))
        rhs.append(1.0 if i == 1 else 0.0)
    rows.append(centred_bspline(p, 1.0 - ks, 2))
    rhs.append(0.0)
    for q in range(2, half + 1):
        rows.append(centred_bspline(p, 0.0 - ks, q))
        rhs.append(0.0)
    a = np.array(rows)
    c = solve(a, np.array(rhs))
    n = _truncation_index(np.abs(c), threshold)
    return FundamentalCoefficients(p, k_min, c[:n].copy(), n + k_min, "modified-fundamental")


def modified_fundamental_coefficients(p: int, threshold: float = 1e-10) -> FundamentalCoefficients:
    """Coefficients ``c^mod_k`` (``k >= 1 - (p+1)/2``) of the modified fundamental spline.

    The parent function interpolates ``delta_{i,1}`` at all positive integers,
    has vanishing second derivative at 1, and vanishing derivatives of orders
    ``2 .. (p+1)/2`` at 0. For ``p = 1`` the closed form ``max(2 - x, 0)`` is used.
    """
    _check_degree(p)
    return _modified_cached(p, float(threshold))


@lru_cache(maxsize=None)
def _weakly_cached(p: int) -> FundamentalCoefficients:
    half = (p - 1) // 2
    ks = np.arange(-half, half + 1)
    if p == 1:
        return FundamentalCoefficients(1, 0, np.array([1.0]), 1, "weakly-fundamental")
    free = ks[ks != 0]
    targets = np.arange(-p + 2, p - 1, 2)
    a = np.array([[centred_bspline(p, float(t - k)) for k in free] for t in targets])
    rhs = -np.array([centred_bspline(p, float(t)) for t in targets])
    sol = solve(a, rhs)
    values = np.ones(p)
    values[ks != 0] = sol
    return FundamentalCoefficients(p, -half, values, half + 1, "weakly-fundamental")


def weakly_fundamental_coefficients(p: int) -> FundamentalCoefficients:
    """The p coefficients of the weakly fundamental spline (``c_0 = 1``).

    The parent function vanishes at the odd integers ``-p+2, ..., p-2``.
    """
    _check_degree(p)
    return _weakly_cached(p)
