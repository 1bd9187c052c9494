"""Inequality-constrained optimization on the unit cube (``g(x) <= 0``).

Each method solves a sequence of unconstrained auxiliary problems with one
of the unconstrained optimizers, warm-starting every solve at the previous
solution.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from ..exceptions import DomainError, InfeasibleError
from .optimizers import DEFAULT_CONFIG, OptimizerConfig, minimize_unconstrained
from .problem import OptimizationProblem, OptimizerResult

Array = np.ndarray

CONSTRAINED_METHODS = ("augmented-lagrangian", "squared-penalty", "log-barrier")


@dataclass(frozen=True)
class FeasibilityResult:
    x: Array
    slack: float
    evaluations: int

    @property
    def feasible(self) -> bool:
        return self.slack <= 0.0


def _max_constraint(g: Callable[[Array], Array]) -> Callable[[Array], float]:
    def h(x: Array) -> float:
        v = np.atleast_1d(np.asarray(g(x), dtype=float))
        return float(np.max(v)) if v.size else -np.inf
    return h


def find_feasible_point(
    g: Callable[[Array], Array],
    d: int,
    x0=None,
    budget: int = 2000,
    restarts: int = 4,
    seed: int = 0,
    config: OptimizerConfig = DEFAULT_CONFIG,
) -> FeasibilityResult:
    """Search a point with ``g(x) <= 0`` by minimizing the slack ``s = max_i g_i(x)``.

    This is the auxiliary problem ``min s`` subject to ``g(x) <= s`` with the
    slack eliminated. The search stops as soon as the slack becomes negative.
    ``slack > 0`` in the result means no feasible point was found.
    """
    h = _max_constraint(g)
    x = np.full(d, 0.5) if x0 is None else np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    s = h(x)
    used = 1
    if s <= 0:
        return FeasibilityResult(x, 0.0, used)

    class _Found(Exception):
        pass

    best = [x, s]

    def tracked(y: Array) -> float:
        v = h(y)
        if v < best[1]:
            best[0], best[1] = y.copy(), v
        if v < 0:
            raise _Found
        return v

    rng = np.random.default_rng(seed)
    starts = [x] + [rng.uniform(0.0, 1.0, d) for _ in range(restarts)]
    per_start = max(budget // len(starts), d + 1)
    problem = OptimizationProblem(tracked, d)
    for start in starts:
        try:
            res = minimize_unconstrained(problem, "nelder-mead", per_start, x0=start, config=config)
            used += res.evaluations
        except _Found:
            used += per_start
            break
    return FeasibilityResult(np.asarray(best[0]), max(best[1], 0.0), used)


def minimize_constrained(
    problem: OptimizationProblem,
    method: str = "augmented-lagrangian",
    budget: int = 10000,
    seed: int | None = None,
    x0=None,
    outer_iterations: int = 10,
    mu0: float | None = None,
    feasibility_tol: float = 1e-6,
    inner_method: str | None = None,
    config: OptimizerConfig = DEFAULT_CONFIG,
) -> OptimizerResult:
    """Minimize ``problem.objective`` subject to ``problem.constraints(x) <= 0``.

    ``squared-penalty`` multiplies ``mu`` by 10 per outer iteration,
    ``log-barrier`` divides it by 10 (starting from a strictly feasible point)
    and ``augmented-lagrangian`` updates multiplier estimates, increasing
    ``mu`` only when the violation does not shrink enough. The returned point
    is the best feasible one seen, or the least violating if none is feasible.
    When no iterate is feasible, the remaining budget goes into a slack
    minimization started from the least violating iterate.
    ``penalty`` in the result is the parameter value at which the returned
    point was computed.
    """
    if problem.constraints is None:
        fallback = "bfgs" if problem.gradient is not None else "nelder-mead"
        return minimize_unconstrained(problem, inner_method or fallback, budget, seed, x0, config=config)
    if method not in CONSTRAINED_METHODS:
        raise DomainError(f"unknown constrained method {method!r}; choose from {', '.join(CONSTRAINED_METHODS)}")
    d = problem.dim
    f, g = problem.objective, problem.constraints
    inner = inner_method or "nelder-mead"  # auxiliary objectives are only C^1
    x = np.full(d, 0.5) if x0 is None else np.clip(np.asarray(x0, dtype=float), 0.0, 1.0)
    used = 0

    if method == "log-barrier":
        feas = find_feasible_point(g, d, x, budget=max(budget // 10, 10 * (d + 1)), seed=seed or 0)
        used += feas.evaluations
        if not feas.feasible or np.max(g(feas.x)) >= 0:
            raise InfeasibleError("no strictly feasible start for the barrier method", feas.slack)
        x = feas.x

    candidates: list[tuple[Array, float, float, float]] = []  # (x, f, violation, mu)

    def record(y: Array, mu: float) -> float:
        v = problem.violation(y)
        candidates.append((y.copy(), float(f(y)), v, mu))
        return v

    if mu0 is None:
        mu0 = 1.0
    mu = mu0
    lam = np.zeros(np.atleast_1d(g(x)).size)
    per_solve = max((budget - used) // outer_iterations, d + 1)
    trace: list[float] = []
    record(x, mu)
    prev_violation = problem.violation(x)
    converged = False

    for k in range(outer_iterations):
        if method == "squared-penalty":
            def aux(y, mu=mu):
                viol = np.maximum(np.atleast_1d(g(y)), 0.0)
                return f(y) + mu * float(viol @ viol)
        elif method == "log-barrier":
            def aux(y, mu=mu):
                gy = np.atleast_1d(g(y))
                if np.any(gy >= 0):
                    return np.inf
                return f(y) - mu * float(np.sum(np.log(-gy)))
        else:
            def aux(y, mu=mu, lam=lam.copy()):
                shifted = np.maximum(lam / mu + np.atleast_1d(g(y)), 0.0)
                return f(y) + 0.5 * mu * float(shifted @ shifted - (lam / mu) @ (lam / mu))

        sub = OptimizationProblem(aux, d)
        cfg = config if k == 0 else _shrunk_simplex(config, k)
        res = minimize_unconstrained(sub, inner, per_solve, seed, x, config=cfg)
        used += res.evaluations
        trace.extend(res.trace)
        x = res.x
        violation = record(x, mu)

        if method == "squared-penalty":
            mu *= 10.0
        elif method == "log-barrier":
            mu /= 10.0
        else:
            lam = np.maximum(lam + mu * np.atleast_1d(g(x)), 0.0)
            if violation > 0.25 * prev_violation and violation > feasibility_tol:
                mu *= 10.0
        if violation <= feasibility_tol and method == "augmented-lagrangian" and k > 0:
            last = candidates[-2]
            if np.max(np.abs(last[0] - x)) < 1e-10:
                converged = True
                break
        prev_violation = violation

    feasible = [c for c in candidates if c[2] <= feasibility_tol]
    if not feasible and budget - used > d + 1:
        # restoration: push the least violating iterate into the feasible set
        start = min(candidates, key=lambda c: c[2])
        feas = find_feasible_point(g, d, start[0], budget=budget - used, restarts=0,
                                   seed=seed or 0, config=replace(config, nm_initial_size=1e-3))
        used += feas.evaluations
        if feas.feasible:
            record(feas.x, start[3])
            feasible = [candidates[-1]]
    pool = feasible if feasible else sorted(candidates, key=lambda c: c[2])[:1]
    xb, fb, vb, mub = min(pool, key=lambda c: c[1])
    return OptimizerResult(xb, fb, used, vb, converged or bool(feasible), len(candidates) - 1, trace, penalty=mub)


def _shrunk_simplex(config: OptimizerConfig, k: int) -> OptimizerConfig:
    return replace(config, nm_initial_size=max(config.nm_initial_size * 0.5**k, 1e-4))
