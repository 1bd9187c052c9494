"""Fuzzy intervals, alpha-cuts and uncertainty propagation through functions.

The extension principle used here defines the alpha-cut of ``y = f(x_1..x_d)``
as ``[min f, max f]`` over the box of input alpha-cuts, so every alpha level
needs one box-constrained minimization and one maximization.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .basis.families import as_tensor_spec
from .basis.tables import grid_coordinates
from .exceptions import DomainError
from .grid import SparseGrid
from .optimize.novak_ritter import initial_grid, new_children, novak_ritter_criterion
from .optimize.optimizers import OptimizerConfig, minimize_unconstrained
from .optimize.problem import OptimizationProblem, rng_stream

Array = np.ndarray


class FuzzyInterval:
    """Convex, normalized fuzzy set on the real line with bounded support."""

    def membership(self, x) -> Array:
        raise NotImplementedError

    def alpha_cut(self, alpha: float) -> tuple[float, float]:
        raise NotImplementedError

    def breakpoints(self) -> Array:
        """Points where the membership may be non-smooth (including the support ends)."""
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        return self.alpha_cut(0.0)

    def samples(self, n: int = 201) -> tuple[Array, Array]:
        """``(x, mu)`` samples on the support, including all breakpoints."""
        lo, hi = self.support
        x = np.union1d(np.linspace(lo, hi, n), self.breakpoints())
        return x, self.membership(x)

    def to_csv_rows(self, n: int = 201) -> list[tuple[float, float]]:
        x, mu = self.samples(n)
        return list(zip(x.tolist(), mu.tolist()))


def _check_alpha(alpha: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    return float(alpha)


@dataclass(frozen=True)
class PiecewiseLinearFuzzy(FuzzyInterval):
    """Membership interpolating ``(x_k, mu_k)`` linearly, zero outside ``[x_0, x_n]``."""

    x: Array
    mu: Array
    cuts: tuple[tuple[float, float, float], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        mu = np.asarray(self.mu, dtype=float)
        if x.ndim != 1 or x.shape != mu.shape or len(x) < 1:
            raise DomainError("need matching 1-D arrays of abscissae and memberships")
        if np.any(np.diff(x) < 0):
            raise DomainError("abscissae must be non-decreasing")
        if np.any(mu < 0) or np.any(mu > 1) or not np.isclose(mu.max(), 1.0, atol=1e-12):
            raise DomainError("memberships must lie in [0, 1] with maximum 1")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "mu", mu)

    def membership(self, x) -> Array:
        xa = np.asarray(x, dtype=float)
        out = np.zeros_like(xa)
        inside = (xa >= self.x[0]) & (xa <= self.x[-1])
        if len(self.x) == 1:
            out[inside] = self.mu[0]
            return out
        # right-continuous lookup that also handles repeated abscissae (jumps)
        k = np.clip(np.searchsorted(self.x, xa[inside], side="right") - 1, 0, len(self.x) - 2)
        x0, x1 = self.x[k], self.x[k + 1]
        m0, m1 = self.mu[k], self.mu[k + 1]
        with np.errstate(invalid="ignore", divide="ignore"):
            u = np.where(x1 > x0, (xa[inside] - x0) / (x1 - x0), 1.0)
        vals = m0 + u * (m1 - m0)
        # at the peak plateau or a jump, take the larger adjacent value (upper semicontinuity)
        exact = np.isin(xa[inside], self.x)
        if np.any(exact):
            pts = xa[inside][exact]
            vals[exact] = [self.mu[self.x == p].max() for p in pts]
        out[inside] = vals
        return out

    def alpha_cut(self, alpha: float) -> tuple[float, float]:
        alpha = _check_alpha(alpha)
        x, mu = self.x, self.mu
        if len(x) == 1:
            return float(x[0]), float(x[0])
        lo, hi = np.inf, -np.inf
        for k in range(len(x) - 1):
            a, b, ma, mb = x[k], x[k + 1], mu[k], mu[k + 1]
            if alpha == 0.0:
                if max(ma, mb) > 0:
                    lo, hi = min(lo, a), max(hi, b)
                continue
            if max(ma, mb) < alpha:
                continue
            if ma >= alpha and mb >= alpha:
                s, e = a, b
            elif ma >= alpha:
                s, e = a, a + (b - a) * (ma - alpha) / (ma - mb)
            else:
                s, e = a + (b - a) * (alpha - ma) / (mb - ma), b
            lo, hi = min(lo, s), max(hi, e)
        if not np.isfinite(lo):
            peak = x[mu == mu.max()]
            return float(peak.min()), float(peak.max())
        return float(lo), float(hi)

    def breakpoints(self) -> Array:
        return np.unique(self.x)


def triangular(a: float, b: float, c: float) -> PiecewiseLinearFuzzy:
    """Triangular fuzzy number with support ``[a, c]`` and peak ``b``."""
    if not a <= b <= c:
        raise DomainError("triangular fuzzy number needs a <= b <= c")
    return PiecewiseLinearFuzzy(np.array([a, b, c]), np.array([0.0 if a < b else 1.0, 1.0, 0.0 if c > b else 1.0]))


def trapezoidal(a: float, b: float, c: float, d: float) -> PiecewiseLinearFuzzy:
    """Trapezoidal fuzzy interval with support ``[a, d]`` and core ``[b, c]``."""
    if not a <= b <= c <= d:
        raise DomainError("trapezoidal fuzzy interval needs a <= b <= c <= d")
    return PiecewiseLinearFuzzy(np.array([a, b, c, d]),
                                np.array([0.0 if a < b else 1.0, 1.0, 1.0, 0.0 if d > c else 1.0]))


def piecewise_linear(points: Sequence[tuple[float, float]]) -> PiecewiseLinearFuzzy:
    pts = np.asarray(points, dtype=float)
    return PiecewiseLinearFuzzy(pts[:, 0], pts[:, 1])


@dataclass(frozen=True)
class QuasiGaussianFuzzy(FuzzyInterval):
    """``exp(-(x - mean)^2 / (2 sigma)^2)`` truncated to ``[mean - k sigma, mean + k sigma]``."""

    mean: float
    sigma: float
    k: float = 3.0

    def __post_init__(self) -> None:
        if self.sigma <= 0 or self.k <= 0:
            raise DomainError("quasi-Gaussian fuzzy number needs sigma > 0 and k > 0")

    def membership(self, x) -> Array:
        xa = np.asarray(x, dtype=float)
        out = np.exp(-((xa - self.mean) ** 2) / (2.0 * self.sigma) ** 2)
        return np.where(np.abs(xa - self.mean) <= self.k * self.sigma, out, 0.0)

    def alpha_cut(self, alpha: float) -> tuple[float, float]:
        alpha = _check_alpha(alpha)
        half = self.k * self.sigma
        if alpha > 0:
            half = min(half, 2.0 * self.sigma * np.sqrt(-np.log(alpha)))
        return float(self.mean - half), float(self.mean + half)

    def breakpoints(self) -> Array:
        return np.array([self.mean - self.k * self.sigma, self.mean, self.mean + self.k * self.sigma])


def quasi_gaussian(mean: float, sigma: float, k: float = 3.0) -> QuasiGaussianFuzzy:
    return QuasiGaussianFuzzy(float(mean), float(sigma), float(k))


def alpha_cut(fz: FuzzyInterval, alpha: float) -> tuple[float, float]:
    """``{x : mu(x) >= alpha}`` for ``alpha > 0``, the closed support for ``alpha = 0``."""
    return fz.alpha_cut(alpha)


# -- extension principle ------------------------------------------------------

@dataclass(frozen=True)
class ExtensionConfig:
    """Box-optimizer settings for :func:`extension_principle`.

    Functions with a ``gradient`` method (interpolants) are optimized by
    multi-start gradient descent, other callables by multi-start Nelder-Mead.
    Both work in projection mode on the box.
    """

    gradient_starts: int = 10
    nelder_mead_starts: int = 10
    budget_per_start: int = 200
    seed: int = 0


class _BoxProblem:
    """``sign * f(a + (b - a) u)`` over the free coordinates ``u`` of a box."""

    def __init__(self, f, lower: Array, upper: Array, sign: float):
        self.f = f
        self.lower, self.upper, self.sign = lower, upper, sign
        self.free = np.flatnonzero(upper > lower)
        self.width = (upper - lower)[self.free]

    def point(self, u: Array) -> Array:
        x = self.lower.copy()
        x[self.free] += self.width * np.clip(u, 0.0, 1.0)
        return x

    def value(self, u: Array) -> float:
        return self.sign * float(self.f(self.point(u)))

    def gradient(self, u: Array) -> Array:
        return self.sign * np.asarray(self.f.gradient(self.point(u)))[self.free] * self.width

    def local(self, x: Array) -> Array:
        return (x[self.free] - self.lower[self.free]) / self.width


def _box_optimum(f, lower: Array, upper: Array, sign: float, warm: Array | None,
                 cfg: ExtensionConfig, stream: tuple[int, ...]) -> Array:
    """Point of the box minimizing ``sign * f``; the warm start is always a candidate."""
    box = _BoxProblem(f, lower, upper, sign)
    if box.free.size == 0:
        return lower.copy()
    smooth = hasattr(f, "gradient")
    problem = OptimizationProblem(box.value, box.free.size, box.gradient if smooth else None)
    method = "gradient-descent" if smooth else "nelder-mead"
    count = cfg.gradient_starts if smooth else cfg.nelder_mead_starts
    rng = rng_stream(cfg.seed, *stream)
    starts = [np.full(box.free.size, 0.5)] + list(rng.uniform(0.0, 1.0, (max(count - 1, 0), box.free.size)))
    if warm is not None:
        starts.insert(0, box.local(warm))
    best_u, best_v = None, np.inf
    for s in starts:
        r = minimize_unconstrained(problem, method, cfg.budget_per_start, None, s, box="project",
                                   config=OptimizerConfig(nm_tol=1e-14))
        if r.f < best_v:
            best_u, best_v = r.x, r.f
    if warm is not None and box.value(box.local(warm)) <= best_v:
        return np.asarray(warm, dtype=float).copy()
    return box.point(best_u)


def extension_principle(
    f: Callable[[Array], float],
    inputs: Sequence[FuzzyInterval],
    m: int = 100,
    config: ExtensionConfig = ExtensionConfig(),
) -> PiecewiseLinearFuzzy:
    """Fuzzy output of ``f`` for fuzzy inputs, sampled at ``alpha_j = j / m``.

    Levels are solved from ``alpha = 1`` downwards and each optimum is a
    candidate for the next (larger) box, so the output cuts are nested.
    The result carries the computed cuts as ``(alpha_j, c_j, d_j)`` in ``cuts``.
    """
    if m < 1:
        raise DomainError("need at least one alpha segment")
    d = len(inputs)
    if d < 1:
        raise DomainError("need at least one fuzzy input")
    alphas = np.arange(m + 1) / m
    lo_vals = np.empty(m + 1)
    hi_vals = np.empty(m + 1)
    warm_min = warm_max = None
    for j in range(m, -1, -1):
        cuts = np.array([fz.alpha_cut(alphas[j]) for fz in inputs])
        lower, upper = cuts[:, 0], cuts[:, 1]
        try:
            x_min = _box_optimum(f, lower, upper, 1.0, warm_min, config, (j, 0))
            x_max = _box_optimum(f, lower, upper, -1.0, warm_max, config, (j, 1))
        except Exception as exc:  # annotate and re-raise with the level
            raise type(exc)(f"alpha level {j} ({alphas[j]:.4g}): {exc}") from exc
        warm_min, warm_max = x_min, x_max
        lo_vals[j], hi_vals[j] = float(f(x_min)), float(f(x_max))
    xs = np.concatenate([lo_vals, hi_vals[::-1]])
    mus = np.concatenate([alphas, alphas[::-1]])
    # remove tiny non-monotonicity from optimizer round-off
    xs = np.maximum.accumulate(xs)
    return PiecewiseLinearFuzzy(xs, mus, tuple((float(a), float(c), float(e)) for a, c, e in zip(alphas, lo_vals, hi_vals)))


# -- fuzzy Novak-Ritter grids ----------------------------------------------------

MIN_BOX_WIDTH = 0.05
BOX_ENLARGEMENT = 0.05  # per side, i.e. 10 % in total


def _search_box(inputs: Sequence[FuzzyInterval], alpha: float) -> tuple[Array, Array]:
    cuts = np.array([fz.alpha_cut(alpha) for fz in inputs])
    a, b = cuts[:, 0].copy(), cuts[:, 1].copy()
    narrow = b - a < MIN_BOX_WIDTH
    mid = (a + b) / 2
    a[narrow], b[narrow] = mid[narrow] - MIN_BOX_WIDTH / 2, mid[narrow] + MIN_BOX_WIDTH / 2
    w = b - a
    return a - BOX_ENLARGEMENT * w, b + BOX_ENLARGEMENT * w


def fuzzy_refinement_set(points: Array, values: Array, levels_sum: Array, degrees: Array,
                         inputs: Sequence[FuzzyInterval], m: int, gamma: float) -> list[int]:
    """Grid positions selected for refinement in one round (each at most once)."""
    selected: dict[int, None] = {}
    for j in range(m + 1):
        a, b = _search_box(inputs, j / m)
        inside = np.flatnonzero(np.all((points >= a) & (points <= b), axis=1))
        if inside.size == 0:
            continue
        v = values[inside]
        r = np.searchsorted(np.sort(v), v, side="right")
        base = levels_sum[inside] + degrees[inside]
        c_min = novak_ritter_criterion(r, base, 0, gamma)
        c_max = (inside.size - r + 2.0) ** gamma * (base + 1.0) ** (1.0 - gamma)
        selected.setdefault(int(inside[int(np.argmin(c_min))]))
        selected.setdefault(int(inside[int(np.argmin(c_max))]))
    return list(selected)


def fuzzy_novak_ritter(
    f: Callable[[Array], float],
    inputs: Sequence[FuzzyInterval],
    n_max: int,
    spec="nak-modified:3",
    gamma: float = 0.1,
    m: int = 100,
    grid: SparseGrid | None = None,
) -> tuple[SparseGrid, Array]:
    """Adaptive grid concentrating points near the optima of every alpha level.

    Each round selects, for every ``alpha_j``, one point for the minimum and one
    for the maximum among the grid points in the enlarged alpha-cut box, then
    refines all selected points once. Rounds repeat until ``n_max`` points.
    """
    d = len(inputs)
    if not 0.0 <= gamma <= 1.0:
        raise DomainError("gamma must lie in [0, 1]")
    specs = as_tensor_spec(spec, d)
    grid = initial_grid(d, specs) if grid is None else grid.copy()

    def evaluate(levels: Array, indices: Array) -> list[float]:
        return [float(f(x)) for x in grid_coordinates(specs, levels, indices)]

    values = evaluate(grid.levels, grid.indices)
    while len(grid) < n_max:
        points = grid_coordinates(specs, grid.levels, grid.indices)
        chosen = fuzzy_refinement_set(points, np.asarray(values), grid.levels.sum(axis=1), grid.degrees,
                                      inputs, m, gamma)
        if not chosen:
            crit = novak_ritter_criterion(np.searchsorted(np.sort(values), values, side="right"),
                                          grid.levels.sum(axis=1), grid.degrees, gamma)
            chosen = [int(np.argmin(crit))]
        targets = [grid[k] for k in chosen]
        for p in targets:
            kids = new_children(grid, p)
            for kid in kids:
                grid.add(kid, canonical=True)
            if kids:
                values.extend(evaluate(np.array([c.level for c in kids]), np.array([c.index for c in kids])))
        for p in targets:
            grid.increment_degree(p)
    return grid, np.asarray(values)


# -- errors ------------------------------------------------------------------

def _l2_pieces(points: Array, fun: Callable[[Array], Array], sub: int) -> float:
    """Composite Simpson rule of ``fun^2`` on the cells of ``points``, one-sided at cell ends."""
    total = 0.0
    for u, v in zip(points[:-1], points[1:]):
        if v <= u:
            continue
        nodes = np.linspace(u, v, sub + 1)
        h = (v - u) / sub
        eps = 1e-13 * max(1.0, abs(u), abs(v))
        left = fun(nodes[:-1] + eps)
        right = fun(nodes[1:] - eps)
        mid = fun((nodes[:-1] + nodes[1:]) / 2)
        total += float(np.sum(h / 6 * (left**2 + 4 * mid**2 + right**2)))
    return total


def fuzzy_l2_error(reference: FuzzyInterval, approx: FuzzyInterval, subdivisions: int = 16) -> float:
    """``||mu_ref - mu_approx||_2 / ||mu_ref||_2`` over the union of supports.

    Simpson's rule on the merged breakpoints is exact for piecewise linear
    memberships; smooth pieces are subdivided ``subdivisions`` times.
    """
    lo = min(reference.support[0], approx.support[0])
    hi = max(reference.support[1], approx.support[1])
    pts = np.union1d(reference.breakpoints(), approx.breakpoints())
    pts = np.union1d(pts[(pts >= lo) & (pts <= hi)], [lo, hi])
    smooth = isinstance(reference, QuasiGaussianFuzzy) or isinstance(approx, QuasiGaussianFuzzy)
    sub = subdivisions if smooth else 1
    norm = _l2_pieces(pts, reference.membership, sub)
    if norm <= 0:
        raise DomainError("reference membership has zero L2 norm")
    diff = _l2_pieces(pts, lambda x: reference.membership(x) - approx.membership(x), sub)
    return float(np.sqrt(diff / norm))
