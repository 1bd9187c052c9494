"""Univariate hierarchical basis families.

Every 1-D basis function of level ``l`` is a finite linear combination of
*primitives* of the same level: B-splines on uniform, Clenshaw-Curtis or
not-a-knot knots, global Lagrange polynomials, or the constant one. The
reference evaluator sums the primitives pointwise; the fast evaluator in
``tables`` turns the same combination into piecewise polynomials.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..exceptions import DomainError
from .bspline import (
    build_knots,
    cardinal_bspline_derivative,
    chebyshev_point,
    grid_point,
    knot_offset,
    lagrange_polynomial,
    min_spline_level,
    nonuniform_bspline,
)
from .fundamental import (
    fundamental_coefficients,
    modified_fundamental_coefficients,
    weakly_fundamental_coefficients,
)

FAMILIES = (
    "uniform",
    "modified",
    "clenshaw-curtis",
    "cc-modified",
    "not-a-knot",
    "nak-modified",
    "cc-not-a-knot",
    "cc-nak-modified",
    "fundamental",
    "fundamental-modified",
    "fundamental-nak",
    "weakly-fundamental",
    "wfs-nak",
)

MODIFIED_FAMILIES = frozenset({"modified", "cc-modified", "nak-modified", "cc-nak-modified", "fundamental-modified"})
CHEBYSHEV_FAMILIES = frozenset({"clenshaw-curtis", "cc-modified", "cc-not-a-knot", "cc-nak-modified"})
# families whose level-l functions vanish at all other level-l grid points
NODAL_INTERPOLATING = frozenset({"fundamental", "fundamental-nak"})
WEAKLY_FUNDAMENTAL = frozenset({"weakly-fundamental", "wfs-nak"})

MAX_DEFAULT_DEGREE = 5


@dataclass(frozen=True)
class BasisSpec:
    """One-dimensional basis: family name and odd degree.

    Degrees above 5 are rejected unless ``allow_high_degree`` is set, since
    linear independence of the hierarchical not-a-knot bases is only
    established up to degree 7.
    """

    family: str
    degree: int
    allow_high_degree: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown basis family {self.family!r}; choose from {', '.join(FAMILIES)}")
        if self.degree < 1 or self.degree % 2 == 0:
            raise DomainError(f"degree must be odd and positive, got {self.degree}")
        if self.degree > MAX_DEFAULT_DEGREE and not self.allow_high_degree:
            raise DomainError(f"degree {self.degree} needs allow_high_degree=True")

    @property
    def is_modified(self) -> bool:
        """Modified families have no boundary points (all levels >= 1)."""
        return self.family in MODIFIED_FAMILIES

    @property
    def chebyshev(self) -> bool:
        return self.family in CHEBYSHEV_FAMILIES

    def point(self, level: int, index) -> np.ndarray | float:
        """Grid coordinate of ``(level, index)`` for this family."""
        if self.chebyshev:
            return chebyshev_point(level, index)
        out = np.asarray(index, dtype=float) / (1 << level)
        return float(out) if np.ndim(index) == 0 else out

    def __str__(self) -> str:
        return f"{self.family}:{self.degree}"

    @classmethod
    def parse(cls, text: str) -> "BasisSpec":
        """Parse ``family:degree`` (e.g. ``not-a-knot:3``)."""
        family, _, degree = text.partition(":")
        return cls(family.strip(), int(degree) if degree else 3)


TensorSpec = tuple[BasisSpec, ...]


def as_tensor_spec(spec: BasisSpec | Sequence[BasisSpec] | str, dim: int) -> TensorSpec:
    """Broadcast a single spec (or ``family:degree`` string) to ``dim`` dimensions."""
    if isinstance(spec, str):
        spec = BasisSpec.parse(spec)
    if isinstance(spec, BasisSpec):
        return (spec,) * dim
    out = tuple(BasisSpec.parse(s) if isinstance(s, str) else s for s in spec)
    if len(out) != dim:
        raise DomainError(f"basis spec has {len(out)} dimensions, expected {dim}")
    return out


# -- primitives -----------------------------------------------------------------

# kinds: "uniform", "cc", "nak", "cc-nak", "lagrange", "lagrange-cc", "const"

def primitive_range(kind: str, level: int, p: int) -> range:
    """Indices of the primitives of a level that do not vanish on [0, 1]."""
    top = 1 << level
    if kind in ("uniform", "cc"):
        return range(-(p - 1) // 2, top + (p - 1) // 2 + 1)
    if kind == "const":
        return range(0, 1)
    return range(0, top + 1)


@lru_cache(maxsize=None)
def primitive_knots(kind: str, level: int, p: int) -> np.ndarray:
    return build_knots(kind, level, p)


def primitive_value(kind: str, level: int, p: int, j: int, x, q: int = 0) -> np.ndarray:
    """Reference value of primitive ``j`` (q-th derivative) at ``x``."""
    xa = np.asarray(x, dtype=float)
    if kind == "const":
        return np.ones_like(xa) if q == 0 else np.zeros_like(xa)
    if kind == "uniform":
        h = 1.0 / (1 << level)
        return cardinal_bspline_derivative(p, q, xa / h + (p + 1) / 2 - j) * h ** (-q)
    if kind in ("cc", "nak", "cc-nak"):
        knots = primitive_knots(kind, level, p)
        return nonuniform_bspline(knots, j - knot_offset(kind, p), p, xa, q)
    if kind in ("lagrange", "lagrange-cc"):
        nodes = grid_point(level, np.arange((1 << level) + 1), kind == "lagrange-cc")
        return lagrange_polynomial(nodes, j, xa, q)
    raise DomainError(f"unknown primitive kind {kind!r}")


@dataclass(frozen=True)
class Combination:
    """Basis function as ``sum_j coeffs[j] * primitive_j`` of one level and kind."""

    kind: str
    level: int
    degree: int
    coeffs: tuple[tuple[int, float], ...]

    def mirrored(self) -> "Combination":
        """Combination of ``x -> f(1 - x)``: all primitive families are symmetric."""
        top = 1 << self.level if self.kind != "const" else 0
        return Combination(self.kind, self.level, self.degree, tuple((top - j, c) for j, c in self.coeffs))

    def evaluate(self, x, q: int = 0) -> np.ndarray:
        xa = np.asarray(x, dtype=float)
        out = np.zeros_like(xa)
        for j, c in self.coeffs:
            out = out + c * primitive_value(self.kind, self.level, self.degree, j, xa, q)
        return out


def _constant(p: int) -> Combination:
    return Combination("const", 0, p, ((0, 1.0),))


def _clip_to_range(kind: str, level: int, p: int, coeffs: dict[int, float]) -> tuple[tuple[int, float], ...]:
    rng = primitive_range(kind, level, p)
    return tuple(sorted((j, float(c)) for j, c in coeffs.items() if rng.start <= j < rng.stop and c != 0.0))


def _spline_kind(family: str, level: int, p: int) -> str:
    """Primitive kind of a (possibly not-a-knot) family at the given level."""
    cheb = family in CHEBYSHEV_FAMILIES
    nak = "nak" in family or "not-a-knot" in family
    if nak:
        if level < min_spline_level(p):
            return "lagrange-cc" if cheb else "lagrange"
        return "cc-nak" if cheb else "nak"
    return "cc" if cheb else "uniform"


def _modified_uniform(kind: str, level: int, p: int) -> Combination:
    # linear extrapolation towards the left boundary via Marsden's identity
    coeffs = {i2: 2.0 - i2 for i2 in range(1 - (p + 1) // 2, 2)}
    return Combination(kind, level, p, _clip_to_range(kind, level, p, coeffs))


def _modified_nak(kind: str, level: int, p: int) -> Combination:
    if p == 1:
        # second derivatives vanish identically; use the modified hat
        return Combination(kind, level, p, ((0, 2.0), (1, 1.0)))
    d1 = float(primitive_value(kind, level, p, 1, 0.0, 2))
    d0 = float(primitive_value(kind, level, p, 0, 0.0, 2))
    return Combination(kind, level, p, ((0, -d1 / d0), (1, 1.0)))


@lru_cache(maxsize=None)
def _nak_collocation_lu(level: int, p: int):
    top = 1 << level
    x = np.arange(top + 1) / top
    a = np.column_stack([primitive_value("nak", level, p, j, x) for j in range(top + 1)])
    return lu_factor(a)


FULL_SOLVE_MAX_LEVEL = 10


def _window_system(level: int, p: int, cols: np.ndarray, rows: np.ndarray) -> np.ndarray:
    x = rows / (1 << level)
    return np.column_stack([primitive_value("nak", level, p, int(j), x) for j in cols])


def _fundamental_nak(level: int, p: int, i: int) -> Combination:
    top = 1 << level
    if level <= FULL_SOLVE_MAX_LEVEL:
        rhs = np.zeros(top + 1)
        rhs[i] = 1.0
        c = lu_solve(_nak_collocation_lu(level, p), rhs)
        coeffs = {j: v for j, v in enumerate(c) if abs(v) > 1e-17}
        return Combination("nak", level, p, _clip_to_range("nak", level, p, coeffs))
    # truncated local system; coefficients decay like the fundamental ones
    w = fundamental_coefficients(p).truncation + p
    cols = np.arange(max(i - w, 0), min(i + w, top) + 1)
    a = _window_system(level, p, cols, cols)
    rhs = (cols == i).astype(float)
    c = np.linalg.solve(a, rhs)
    return Combination("nak", level, p, _clip_to_range("nak", level, p, dict(zip(cols.tolist(), c))))


def _wfs_nak(level: int, p: int, i: int) -> Combination:
    """Weakly fundamental not-a-knot spline: local nak combination vanishing at even points.

    The window ``J = [i - w, i + w]`` (clipped to the level) grows from
    ``w = (p - 1)/2`` until the conditions at all even level points inside the
    union support are exactly satisfiable with ``c_i = 1``.
    """
    top = 1 << level
    w = (p - 1) // 2
    while True:
        cols = np.arange(max(i - w, 0), min(i + w, top) + 1)
        lo, hi = cols[0] - p - 2, cols[-1] + p + 2
        evens = np.array([e for e in range(max(lo, 0), min(hi, top) + 1) if e % 2 == 0 and e != i])
        if len(evens) == 0:
            return Combination("nak", level, p, ((i, 1.0),))
        a = _window_system(level, p, cols, evens)
        nz = np.abs(a).max(axis=1) > 0
        a, evens = a[nz], evens[nz]
        centre = cols == i
        rhs = -a[:, centre].ravel()
        free = a[:, ~centre]
        sol, *_ = np.linalg.lstsq(free, rhs, rcond=None)
        resid = np.max(np.abs(free @ sol - rhs)) if len(rhs) else 0.0
        if resid <= 1e-12 or (cols[0] == 0 and cols[-1] == top):
            if resid > 1e-9:
                raise DomainError(f"no weakly fundamental not-a-knot spline for level {level}, index {i}")
            coeffs = {int(j): float(c) for j, c in zip(cols[~centre], sol)}
            coeffs[i] = 1.0
            return Combination("nak", level, p, _clip_to_range("nak", level, p, coeffs))
        w += 1


def _mod_fundamental(level: int, p: int) -> Combination:
    c = modified_fundamental_coefficients(p)
    return Combination("uniform", level, p, _clip_to_range("uniform", level, p, c.as_dict()))


@lru_cache(maxsize=None)
def combination(family: str, p: int, level: int, index: int) -> Combination:
    """Primitive combination defining the 1-D function ``(level, index)`` of a family."""
    top = 1 << level
    if level < 0 or index < 0 or index > top:
        raise DomainError(f"invalid level-index pair ({level}, {index})")
    if family in MODIFIED_FAMILIES:
        if level == 0:
            raise DomainError(f"modified family {family!r} has no level-zero functions")
        if level == 1:
            return _constant(p)
        if index == top - 1 and index != 1:
            return combination(family, p, level, 1).mirrored()
        if index == 1:
            if family in ("modified", "cc-modified"):
                return _modified_uniform("cc" if family == "cc-modified" else "uniform", level, p)
            if family == "fundamental-modified":
                return _mod_fundamental(level, p)
            return _modified_nak(_spline_kind(family, level, p), level, p)
        if family == "fundamental-modified":
            return combination("fundamental", p, level, index)
        base = {"modified": "uniform", "cc-modified": "clenshaw-curtis",
                "nak-modified": "not-a-knot", "cc-nak-modified": "cc-not-a-knot"}[family]
        return combination(base, p, level, index)
    if family in ("uniform", "clenshaw-curtis", "not-a-knot", "cc-not-a-knot"):
        kind = _spline_kind(family, level, p)
        return Combination(kind, level, p, ((index, 1.0),))
    if family == "fundamental":
        c = fundamental_coefficients(p)
        coeffs = {index + k: v for k, v in c.as_dict().items()}
        return Combination("uniform", level, p, _clip_to_range("uniform", level, p, coeffs))
    if family == "fundamental-nak":
        if level < min_spline_level(p):
            return Combination("lagrange", level, p, ((index, 1.0),))
        return _fundamental_nak(level, p, index)
    if family == "weakly-fundamental":
        if level == 0:
            return Combination("lagrange", 0, p, ((index, 1.0),))
        c = weakly_fundamental_coefficients(p)
        coeffs = {index + k: v for k, v in c.as_dict().items()}
        return Combination("uniform", level, p, _clip_to_range("uniform", level, p, coeffs))
    if family == "wfs-nak":
        if level < min_spline_level(p):
            return Combination("lagrange", level, p, ((index, 1.0),))
        return _wfs_nak(level, p, index)
    raise DomainError(f"unknown basis family {family!r}")


def _spec_of(spec: BasisSpec | str) -> BasisSpec:
    return BasisSpec.parse(spec) if isinstance(spec, str) else spec


def basis_value(spec: BasisSpec | str, level: int, index: int, x):
    """Reference value of the 1-D basis function ``(level, index)`` at ``x``."""
    return basis_derivative(spec, level, index, x, 0)


def basis_derivative(spec: BasisSpec | str, level: int, index: int, x, q: int = 1):
    """Reference q-th derivative of the 1-D basis function ``(level, index)``."""
    spec = _spec_of(spec)
    if q < 0:
        raise DomainError("derivative order must be non-negative")
    out = combination(spec.family, spec.degree, int(level), int(index)).evaluate(x, q)
    return float(out) if np.ndim(x) == 0 else out


def tensor_basis_value(spec, point, x) -> float:
    """Tensor-product basis value ``prod_t phi_{l_t, i_t}(x_t)`` (reference path)."""
    level, index = point[0], point[1]
    specs = as_tensor_spec(spec, len(level))
    return float(np.prod([basis_value(s, l, i, xt) for s, l, i, xt in zip(specs, level, index, x)]))


def tensor_basis_gradient(spec, point, x) -> np.ndarray:
    """Gradient of the tensor-product basis function by the product rule."""
    level, index = point[0], point[1]
    d = len(level)
    specs = as_tensor_spec(spec, d)
    vals = np.array([basis_value(s, l, i, xt) for s, l, i, xt in zip(specs, level, index, x)])
    ders = np.array([basis_derivative(s, l, i, xt, 1) for s, l, i, xt in zip(specs, level, index, x)])
    grad = np.empty(d)
    for t in range(d):
        grad[t] = ders[t] * np.prod(np.delete(vals, t))
    return grad
