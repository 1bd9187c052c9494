"""Unconstrained optimizers on the unit cube.

Gradient-based: gradient descent, non-linear conjugate gradients (Polak-Ribiere+),
BFGS and Rprop. Gradient-free: Nelder-Mead and differential evolution
(rand/1/bin). All methods share a :class:`CountedObjective`, so the reported
best point is the best of all evaluated points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.optimize import minimize_scalar

from ..exceptions import DomainError
from .problem import BudgetExhausted, CountedObjective, OptimizationProblem, OptimizerResult, rng_stream

Array = np.ndarray

GRADIENT_METHODS = ("gradient-descent", "nlcg", "bfgs", "rprop")
GRADIENT_FREE_METHODS = ("nelder-mead", "differential-evolution")
METHODS = GRADIENT_METHODS + GRADIENT_FREE_METHODS


@dataclass(frozen=True)
class OptimizerConfig:
    """Tunable constants of the optimizers."""

    armijo_c1: float = 1e-4
    armijo_beta: float = 0.5
    max_backtracks: int = 50
    gradient_tol: float = 1e-10
    step_tol: float = 1e-12
    line_search: str = "armijo"  # or "exact" (scalar minimization along the direction)
    nm_reflection: float = 1.0
    nm_expansion: float = 2.0
    nm_contraction: float = 0.5
    nm_shrink: float = 0.5
    nm_initial_size: float = 0.1
    nm_tol: float = 1e-12
    de_weight: float = 0.5
    de_crossover: float = 0.9
    de_max_population: int = 40
    rprop_initial_step: float = 0.01
    rprop_increase: float = 1.2
    rprop_decrease: float = 0.5
    rprop_max_step: float = 0.5


DEFAULT_CONFIG = OptimizerConfig()


class LineSearchResult(NamedTuple):
    step: float
    value: float
    accepted: bool


def armijo_line_search(
    f: Callable[[Array], float],
    x,
    direction,
    step: float = 1.0,
    gradient=None,
    fx: float | None = None,
    c1: float = DEFAULT_CONFIG.armijo_c1,
    beta: float = DEFAULT_CONFIG.armijo_beta,
    max_backtracks: int = DEFAULT_CONFIG.max_backtracks,
) -> LineSearchResult:
    """Backtracking search for ``f(x + s d) <= f(x) + c1 s <grad f(x), d>``.

    Without a gradient the plain decrease ``f(x + s d) <= f(x)`` is required.
    If no trial step is accepted, the smallest trial step is returned with
    ``accepted = False``.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(direction, dtype=float)
    fx = f(x) if fx is None else fx
    slope = 0.0 if gradient is None else float(np.dot(gradient, d))
    if gradient is not None and slope > 0:
        raise DomainError("line search direction is not a descent direction")
    s = float(step)
    value = np.inf
    for _ in range(max_backtracks + 1):
        value = f(x + s * d)
        if value <= fx + c1 * s * slope:
            return LineSearchResult(s, value, True)
        s *= beta
    return LineSearchResult(s / beta, value, False)


def _max_feasible_step(x: Array, d: Array) -> float:
    with np.errstate(divide="ignore", invalid="ignore"):
        up = np.where(d > 0, (1.0 - x) / d, np.inf)
        down = np.where(d < 0, -x / d, np.inf)
    return float(max(min(np.min(up), np.min(down)), 0.0))


def _line_search(obj: CountedObjective, x: Array, fx: float, g: Array, d: Array,
                 trial: float, cfg: OptimizerConfig) -> LineSearchResult:
    if cfg.line_search == "exact":
        hi = _max_feasible_step(x, d)
        if hi <= 0:
            return LineSearchResult(0.0, fx, False)
        res = minimize_scalar(lambda s: obj(x + s * d), bounds=(0.0, hi), method="bounded",
                              options={"xatol": 1e-14, "maxiter": 500})
        s = float(res.x)
        v = obj(x + s * d)
        return LineSearchResult(s, v, v <= fx)
    return armijo_line_search(obj, x, d, trial, g, fx, cfg.armijo_c1, cfg.armijo_beta, cfg.max_backtracks)


def _trial_step(d: Array, previous: float | None) -> float:
    cap = 1.0 / max(np.max(np.abs(d)), 1e-300)
    return min(cap, 1.0 if previous is None else 2.0 * previous)


def _gradient_descent(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    fx = obj(x)
    step = None
    while True:
        g = obj.gradient(x)
        if np.linalg.norm(g) <= cfg.gradient_tol:
            return True
        d = -g
        ls = _line_search(obj, x, fx, g, d, _trial_step(d, step), cfg)
        if not ls.accepted or ls.step * np.linalg.norm(d) < cfg.step_tol:
            return ls.accepted
        x = x + ls.step * d
        fx, step = ls.value, ls.step
        state["iterations"] += 1


def _nlcg(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    fx = obj(x)
    g = obj.gradient(x)
    d = -g
    step = None
    since_restart = 0
    while True:
        if np.linalg.norm(g) <= cfg.gradient_tol:
            return True
        ls = _line_search(obj, x, fx, g, d, _trial_step(d, step), cfg)
        if not ls.accepted:
            if since_restart == 0:
                return False
            d, since_restart = -g, 0  # retry along steepest descent
            continue
        x = x + ls.step * d
        state["iterations"] += 1
        if ls.step * np.linalg.norm(d) < cfg.step_tol:
            return True
        fx, step = ls.value, ls.step
        g_new = obj.gradient(x)
        beta = max(0.0, float(g_new @ (g_new - g)) / max(float(g @ g), 1e-300))
        since_restart += 1
        if since_restart >= x.size:
            beta, since_restart = 0.0, 0
        d = -g_new + beta * d
        if d @ g_new >= 0:
            d, since_restart = -g_new, 0
        g = g_new


def _bfgs(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    n = x.size
    fx = obj(x)
    g = obj.gradient(x)
    h = np.eye(n)
    fresh = True
    while True:
        if np.linalg.norm(g) <= cfg.gradient_tol:
            return True
        d = -h @ g
        if d @ g >= 0:
            h, d, fresh = np.eye(n), -g, True
        trial = _trial_step(d, None) if fresh else min(1.0, _trial_step(d, None))
        ls = _line_search(obj, x, fx, g, d, trial, cfg)
        if not ls.accepted:
            if fresh:
                return False
            h, fresh = np.eye(n), True
            continue
        s = ls.step * d
        x = x + s
        state["iterations"] += 1
        if np.linalg.norm(s) < cfg.step_tol:
            return True
        fx = ls.value
        g_new = obj.gradient(x)
        y = g_new - g
        sy = float(s @ y)
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            if fresh:
                h = (sy / float(y @ y)) * np.eye(n)
            rho = 1.0 / sy
            v = np.eye(n) - rho * np.outer(s, y)
            h = v @ h @ v.T + rho * np.outer(s, s)
            fresh = False
        g = g_new


def _rprop(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    delta = np.full(x.size, cfg.rprop_initial_step)
    g_old = np.zeros(x.size)
    obj(x)
    while True:
        g = obj.gradient(x)
        if np.linalg.norm(g) <= cfg.gradient_tol or np.max(delta) < cfg.step_tol:
            return True
        prod = g * g_old
        delta = np.where(prod > 0, np.minimum(delta * cfg.rprop_increase, cfg.rprop_max_step), delta)
        delta = np.where(prod < 0, delta * cfg.rprop_decrease, delta)
        g = np.where(prod < 0, 0.0, g)
        x = np.clip(x - np.sign(g) * delta, 0.0, 1.0)
        obj(x)
        g_old = g
        state["iterations"] += 1


def _initial_simplex(x: Array, size: float) -> Array:
    pts = [x]
    for t in range(x.size):
        e = x.copy()
        e[t] += size if x[t] + size <= 1.0 else -size
        pts.append(e)
    return np.array(pts)


def _nelder_mead(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    n = x.size
    simplex = _initial_simplex(x, cfg.nm_initial_size)
    values = np.array([obj(p) for p in simplex])
    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        spread = np.max(np.abs(simplex[1:] - simplex[0])) if n else 0.0
        if spread < cfg.nm_tol:
            return True
        state["iterations"] += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + cfg.nm_reflection * (centroid - worst)
        fr = obj(xr)
        if fr < values[0]:
            xe = centroid + cfg.nm_expansion * (xr - centroid)
            fe = obj(xe)
            simplex[-1], values[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
            continue
        if fr < values[-1]:
            xc = centroid + cfg.nm_contraction * (xr - centroid)  # outer contraction
            fc = obj(xc)
            if fc <= fr:
                simplex[-1], values[-1] = xc, fc
                continue
        else:
            xc = centroid + cfg.nm_contraction * (worst - centroid)  # inner contraction
            fc = obj(xc)
            if fc < values[-1]:
                simplex[-1], values[-1] = xc, fc
                continue
        for k in range(1, n + 1):
            simplex[k] = simplex[0] + cfg.nm_shrink * (simplex[k] - simplex[0])
            values[k] = obj(simplex[k])


def de_population_size(d: int, cfg: OptimizerConfig = DEFAULT_CONFIG) -> int:
    return max(min(10 * d, cfg.de_max_population), 4)


def _differential_evolution(obj: CountedObjective, x: Array, cfg: OptimizerConfig, state: dict) -> bool:
    rng: np.random.Generator = state["rng"]
    n = x.size
    m = de_population_size(n, cfg)
    pop = rng.uniform(0.0, 1.0, (m, n))
    pop[0] = x
    values = np.array([obj(p) for p in pop])
    while True:
        state["iterations"] += 1
        for i in range(m):
            others = rng.choice(np.delete(np.arange(m), i), 3, replace=False)
            a, b, c = pop[others]
            mutant = np.clip(a + cfg.de_weight * (b - c), 0.0, 1.0)
            cross = rng.uniform(size=n) < cfg.de_crossover
            cross[rng.integers(n)] = True
            trial = np.where(cross, mutant, pop[i])
            ft = obj(trial)
            if ft <= values[i]:
                pop[i], values[i] = trial, ft
        if np.ptp(values) <= 1e-15 * (1 + abs(values.min())) and np.max(np.ptp(pop, axis=0)) < cfg.nm_tol:
            return True


_METHODS = {
    "gradient-descent": _gradient_descent,
    "nlcg": _nlcg,
    "bfgs": _bfgs,
    "rprop": _rprop,
    "nelder-mead": _nelder_mead,
    "differential-evolution": _differential_evolution,
}


def minimum_budget(method: str, d: int, cfg: OptimizerConfig = DEFAULT_CONFIG) -> int:
    if method == "nelder-mead":
        return d + 1
    if method == "differential-evolution":
        return de_population_size(d, cfg)
    return 2


def minimize_unconstrained(
    problem: OptimizationProblem,
    method: str = "bfgs",
    budget: int = 1000,
    seed: int | None = None,
    x0=None,
    box: str = "infinity",
    config: OptimizerConfig = DEFAULT_CONFIG,
) -> OptimizerResult:
    """Minimize ``problem.objective`` over ``[0, 1]^d`` with at most ``budget`` evaluations.

    Gradient calls count against the budget. ``box="infinity"`` treats points
    outside the cube as having value ``+inf``; ``box="project"`` clips them.
    Constraints of ``problem`` are ignored here.
    """
    if method not in _METHODS:
        raise DomainError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    d = problem.dim
    if budget < minimum_budget(method, d, config):
        raise DomainError(f"{method} needs a budget of at least {minimum_budget(method, d, config)}")
    if method in GRADIENT_METHODS and problem.gradient is None:
        raise DomainError(f"{method} needs the gradient of the objective")
    if method == "differential-evolution" and seed is None:
        raise DomainError("differential evolution needs a seed")
    x = np.full(d, 0.5) if x0 is None else np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    obj = CountedObjective(problem, budget, box)
    state = {"iterations": 0}
    if seed is not None:
        state["rng"] = rng_stream(seed, METHODS.index(method))
    try:
        converged = _METHODS[method](obj, x.copy(), config, state)
    except BudgetExhausted:
        converged = False
    return obj.result(bool(converged), state["iterations"], x)
