"""Surrogate-based global optimization on adaptive sparse grids.

1. Sample ``f`` on a Novak-Ritter grid of ``n_max`` points.
2. Interpolate the samples (direct hierarchization by default).
3. Optimize the cheap interpolant: the best grid point ``x0``, local
   gradient-based runs from ``x0`` (giving ``x1``) and global runs, namely
   gradient-free methods plus multi-start versions of the gradient methods
   (giving ``x2``). The candidate with the smallest true value is returned.

Only steps 1 and 3 evaluate ``f``: ``n_max`` times on the grid plus once per
candidate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..basis.families import BasisSpec, as_tensor_spec
from ..grid import SparseGrid
from ..surrogate import Interpolant
from .constrained import minimize_constrained
from .novak_ritter import RefinementConfig, novak_ritter_generate
from .optimizers import GRADIENT_FREE_METHODS, GRADIENT_METHODS, minimize_unconstrained
from .problem import OptimizationProblem, OptimizerResult, rng_stream

Array = np.ndarray

DEFAULT_SPEC = BasisSpec("nak-modified", 3)
LINEAR_SPEC = BasisSpec("modified", 1)


@dataclass(frozen=True)
class SurrogateConfig:
    """Budgets (in surrogate evaluations) of step 3.

    ``starts=None`` uses ``min(10 d, 100)`` random starts for each
    globalized gradient method; ``global_budget`` is split evenly among them.
    """

    local_budget: int = 1000
    global_budget: int = 2000
    starts: int | None = None
    local_methods: tuple[str, ...] = GRADIENT_METHODS
    global_methods: tuple[str, ...] = GRADIENT_FREE_METHODS
    constrained_method: str = "augmented-lagrangian"
    feasibility_tol: float = 1e-6


@dataclass
class PipelineResult(OptimizerResult):
    """Optimizer result with the grid and surrogate it was computed from."""

    grid: SparseGrid | None = field(default=None, repr=False)
    values: Array | None = field(default=None, repr=False)
    surrogate: Interpolant | None = field(default=None, repr=False)
    candidates: list[tuple[str, Array, float]] = field(default_factory=list, repr=False)


def multistart_count(d: int) -> int:
    return min(10 * d, 100)


def _best_grid_point(points: Array, values: Array, g: Callable | None, tol: float) -> Array:
    if g is None:
        return points[int(np.argmin(values))].copy()
    viol = np.array([np.max(np.maximum(np.atleast_1d(g(x)), 0.0)) for x in points])
    feasible = viol <= tol
    if np.any(feasible):
        idx = np.flatnonzero(feasible)[int(np.argmin(values[feasible]))]
    else:
        idx = int(np.argmin(viol))
    return points[idx].copy()


def _surrogate_minimizers(fs: Interpolant, x0: Array, seed: int, cfg: SurrogateConfig) -> tuple[Array, Array]:
    """``(x1, x2)``: best local result from ``x0`` and best global result on ``fs``."""
    d = fs.dim
    problem = OptimizationProblem.from_interpolant(fs)
    local = [minimize_unconstrained(problem, m, cfg.local_budget, seed, x0) for m in cfg.local_methods]
    x1 = min(local, key=lambda r: r.f).x if local else x0

    found: list[OptimizerResult] = []
    for k, m in enumerate(cfg.global_methods):
        found.append(minimize_unconstrained(problem, m, cfg.global_budget, seed, None))
    m_starts = multistart_count(d) if cfg.starts is None else cfg.starts
    per_start = max(cfg.global_budget // max(m_starts, 1), 2)
    rng = rng_stream(seed, 100)
    starts = rng.uniform(0.0, 1.0, (m_starts, d))
    for m in cfg.local_methods:
        for s in starts:
            found.append(minimize_unconstrained(problem, m, per_start, seed, s))
    x2 = min(found, key=lambda r: r.f).x if found else x0
    return x1, x2


def _constrained_minimizers(fs: Interpolant, g: Callable, x0: Array, seed: int,
                            cfg: SurrogateConfig) -> tuple[Array, Array]:
    d = fs.dim
    problem = OptimizationProblem(lambda x: float(fs.evaluate(x)), d, constraints=g)
    budget = 10 * cfg.local_budget
    x1 = minimize_constrained(problem, cfg.constrained_method, budget, seed, x0,
                              feasibility_tol=cfg.feasibility_tol).x
    m_starts = max((multistart_count(d) if cfg.starts is None else cfg.starts) // 2, 1)
    rng = rng_stream(seed, 200)
    best: OptimizerResult | None = None
    for s in rng.uniform(0.0, 1.0, (m_starts, d)):
        r = minimize_constrained(problem, cfg.constrained_method, max(cfg.global_budget, 10 * (d + 1)), seed, s,
                                 feasibility_tol=cfg.feasibility_tol)
        if r.violation <= cfg.feasibility_tol and (best is None or r.f < best.f):
            best = r
    x2 = best.x if best is not None else x1
    return x1, x2


def _pick(f: Callable, g: Callable | None, named: list[tuple[str, Array]], tol: float,
          known: dict[int, float]) -> tuple[list[tuple[str, Array, float]], int]:
    """Evaluate the candidates on ``f`` and sort them (feasible first, then by value)."""
    out = []
    used = 0
    for k, (name, x) in enumerate(named):
        if k in known:
            v = known[k]
        else:
            v = float(f(x))
            used += 1
        out.append((name, x, v))
    if g is not None:
        viol = {id(x): float(np.max(np.maximum(np.atleast_1d(g(x)), 0.0))) for _, x, _ in out}
        out.sort(key=lambda c: (viol[id(c[1])] > tol, viol[id(c[1])] if viol[id(c[1])] > tol else 0.0, c[2]))
    else:
        out.sort(key=lambda c: c[2])
    return out, used


def optimize_surrogate(
    f: Callable[[Array], float],
    d: int,
    config: RefinementConfig = RefinementConfig(),
    spec=DEFAULT_SPEC,
    seed: int = 0,
    constraints: Callable[[Array], Array] | None = None,
    surrogate_config: SurrogateConfig = SurrogateConfig(),
) -> PipelineResult:
    """Approximate ``argmin f`` over ``[0, 1]^d`` (subject to ``constraints <= 0``).

    The constraint function is assumed cheap and is used exactly; only the
    objective is replaced by its sparse grid interpolant.
    """
    spec = as_tensor_spec(spec, d)
    grid, values = novak_ritter_generate(f, config, spec, d=d)
    fs = Interpolant.from_values(grid, spec, values)
    return _optimize_interpolant(f, fs, values, seed, constraints, surrogate_config, len(grid))


def _optimize_interpolant(f, fs: Interpolant, values: Array, seed: int, constraints, cfg: SurrogateConfig,
                          used: int) -> PipelineResult:
    points = fs.points()
    tol = cfg.feasibility_tol
    x0 = _best_grid_point(points, values, constraints, tol)
    f0 = float(values[int(np.argmin(np.max(np.abs(points - x0), axis=1)))])
    if constraints is None:
        x1, x2 = _surrogate_minimizers(fs, x0, seed, cfg)
    else:
        x1, x2 = _constrained_minimizers(fs, constraints, x0, seed, cfg)
    ranked, extra = _pick(f, constraints, [("grid", x0), ("local", x1), ("global", x2)], tol, {0: f0})
    name, xb, fb = ranked[0]
    viol = 0.0 if constraints is None else float(np.max(np.maximum(np.atleast_1d(constraints(xb)), 0.0)))
    return PipelineResult(np.asarray(xb), fb, used + extra, viol, True, 0, [],
                          grid=fs.grid, values=values, surrogate=fs, candidates=ranked)


def optimize_linear_surrogate(
    f: Callable[[Array], float],
    grid: SparseGrid,
    values: Array,
    seed: int = 0,
    constraints: Callable[[Array], Array] | None = None,
    surrogate_config: SurrogateConfig = SurrogateConfig(),
) -> PipelineResult:
    """Comparison method: gradient-free optimization of a piecewise linear surrogate.

    The modified hat basis (p = 1) is used on the given grid and values, so
    both pipelines share the same ``f`` evaluations.
    """
    fs = Interpolant.from_values(grid, as_tensor_spec(LINEAR_SPEC, grid.dim), values)
    cfg = surrogate_config
    points = fs.points()
    x0 = _best_grid_point(points, values, constraints, cfg.feasibility_tol)
    f0 = float(values[int(np.argmin(np.max(np.abs(points - x0), axis=1)))])
    problem = OptimizationProblem(lambda x: float(fs.evaluate(x)), grid.dim, constraints=constraints)
    named = [("grid", x0)]
    for m in cfg.global_methods:
        if constraints is None:
            r = minimize_unconstrained(problem, m, cfg.global_budget, seed, x0 if m == "nelder-mead" else None)
        else:
            r = minimize_constrained(problem, cfg.constrained_method, 10 * cfg.global_budget, seed, x0,
                                     feasibility_tol=cfg.feasibility_tol, inner_method=m)
        named.append((m, r.x))
    ranked, extra = _pick(f, constraints, named, cfg.feasibility_tol, {0: f0})
    name, xb, fb = ranked[0]
    viol = 0.0 if constraints is None else float(np.max(np.maximum(np.atleast_1d(constraints(xb)), 0.0)))
    return PipelineResult(np.asarray(xb), fb, len(grid) + extra, viol, True, 0, [],
                          grid=grid, values=values, surrogate=fs, candidates=ranked)


def optimize_direct(
    f: Callable[[Array], float],
    d: int,
    n_max: int,
    seed: int = 0,
    methods: tuple[str, ...] = GRADIENT_FREE_METHODS,
) -> OptimizerResult:
    """Comparison method: gradient-free methods on ``f`` itself, ``n_max`` split evenly."""
    problem = OptimizationProblem(f, d)
    share = max(n_max // len(methods), 1)
    results = [minimize_unconstrained(problem, m, share, seed) for m in methods]
    best = min(results, key=lambda r: r.f)
    best.evaluations = sum(r.evaluations for r in results)
    return best
