"""Problem and result types shared by the optimizers, plus budget bookkeeping."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..exceptions import DomainError

Array = np.ndarray


@dataclass
class OptimizationProblem:
    """Minimize ``objective`` over ``[0, 1]^dim`` subject to ``constraints(x) <= 0``.

    ``gradient`` is optional and required only by gradient-based methods.
    """

    objective: Callable[[Array], float]
    dim: int
    gradient: Callable[[Array], Array] | None = None
    constraints: Callable[[Array], Array] | None = None

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise DomainError("problem dimension must be positive")

    @property
    def constrained(self) -> bool:
        return self.constraints is not None

    def violation(self, x) -> float:
        """``||(g(x))_+||_inf`` (zero without constraints)."""
        if self.constraints is None:
            return 0.0
        g = np.atleast_1d(np.asarray(self.constraints(np.asarray(x, dtype=float)), dtype=float))
        return float(np.max(np.maximum(g, 0.0))) if g.size else 0.0

    @classmethod
    def from_interpolant(cls, f, constraints=None) -> "OptimizationProblem":
        """Problem for a surrogate with ``evaluate``/``gradient`` methods."""
        return cls(lambda x: float(f.evaluate(x)), f.dim, lambda x: np.asarray(f.gradient(x)), constraints)


@dataclass
class OptimizerResult:
    """Best point found, its value, and run statistics."""

    x: Array
    f: float
    evaluations: int
    violation: float = 0.0
    converged: bool = False
    iterations: int = 0
    trace: list[float] = field(default_factory=list, repr=False)
    penalty: float | None = None

    @property
    def x_best(self) -> Array:
        return self.x

    @property
    def f_best(self) -> float:
        return self.f

    def trace_rows(self) -> list[tuple[int, float, float]]:
        """``(eval_index, f_value, best_so_far)`` rows for CSV output."""
        rows = []
        best = np.inf
        for k, v in enumerate(self.trace, start=1):
            best = min(best, v)
            rows.append((k, v, best))
        return rows


class BudgetExhausted(Exception):
    """Raised internally when the evaluation budget is used up."""


class CountedObjective:
    """Budgeted objective with a best-so-far record.

    Points outside the unit cube have value ``+inf`` and cost no evaluation
    in ``infinity`` mode; in ``project`` mode they are clipped into the cube
    first. Gradient calls share the budget with value calls.
    """

    def __init__(self, problem: OptimizationProblem, budget: int, box: str = "infinity"):
        if box not in ("infinity", "project"):
            raise DomainError(f"unknown box handling {box!r}")
        self.problem = problem
        self.budget = int(budget)
        self.box = box
        self.count = 0
        self.trace: list[float] = []
        self.best_x: Array | None = None
        self.best_f = np.inf

    @property
    def remaining(self) -> int:
        return self.budget - self.count

    def _inside(self, x: Array) -> Array | None:
        if self.box == "project":
            return np.clip(x, 0.0, 1.0)
        if np.any(x < 0.0) or np.any(x > 1.0):
            return None
        return x

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        xin = self._inside(x)
        if xin is None:
            return np.inf
        if self.count >= self.budget:
            raise BudgetExhausted
        self.count += 1
        v = float(self.problem.objective(xin))
        if np.isnan(v):
            v = np.inf
        self.trace.append(v)
        if v < self.best_f:
            self.best_f, self.best_x = v, xin.copy()
        return v

    def gradient(self, x) -> Array:
        if self.problem.gradient is None:
            raise DomainError("this method needs the gradient of the objective")
        x = np.asarray(x, dtype=float)
        if self.count >= self.budget:
            raise BudgetExhausted
        self.count += 1
        return np.asarray(self.problem.gradient(np.clip(x, 0.0, 1.0)), dtype=float)

    def result(self, converged: bool, iterations: int, fallback: Array) -> OptimizerResult:
        x = self.best_x if self.best_x is not None else np.clip(fallback, 0.0, 1.0)
        f = self.best_f if self.best_x is not None else np.inf
        return OptimizerResult(np.array(x), float(f), self.count, self.problem.violation(x) if self.problem.constrained else 0.0,
                               converged, iterations, list(self.trace))


def rng_stream(seed: int, *keys: int) -> np.random.Generator:
    """Independent generator for the stream ``keys`` derived from ``seed``.

    Streams are addressed by integer keys rather than drawn sequentially, so
    a run's randomness does not depend on how work is scheduled.
    """
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys)))
