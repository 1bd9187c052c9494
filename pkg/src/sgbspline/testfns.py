"""Benchmark optimization problems scaled to the unit cube.

Each problem is stated on its natural box ``[a, b]`` and evaluated on
``[0, 1]^d`` through the affine map ``xbar = a + (b - a) * x``. All
formulas extend smoothly beyond the box, so small displacements
``x -> f(x - a)`` remain evaluable.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import DomainError

Array = np.ndarray


def _branin02(x: Array) -> Array:
    x1, x2 = x[..., 0], x[..., 1]
    a = -51.0 * x1**2 / (40.0 * np.pi**2) + 5.0 * x1 / np.pi + x2 - 6.0
    return a**2 + (10.0 - 5.0 / (4.0 * np.pi)) * np.cos(x1) * np.cos(x2) + np.log(x1**2 + x2**2 + 1.0) + 10.0


def _goldstein_price(x: Array) -> Array:
    x1, x2 = x[..., 0], x[..., 1]
    first = 1.0 + (x1 + x2 + 1.0) ** 2 * (19.0 - 14.0 * x1 + 3.0 * x1**2 - 14.0 * x2 + 6.0 * x1 * x2 + 3.0 * x2**2)
    second = 30.0 + (2.0 * x1 - 3.0 * x2) ** 2 * (
        18.0 - 32.0 * x1 + 12.0 * x1**2 + 48.0 * x2 - 36.0 * x1 * x2 + 27.0 * x2**2
    )
    return 1e-4 * first * second


def _schwefel06(x: Array) -> Array:
    x1, x2 = x[..., 0], x[..., 1]
    return np.maximum(np.abs(x1 + 2.0 * x2 - 7.0), np.abs(2.0 * x1 + x2 - 5.0))


def _ackley(x: Array) -> Array:
    d = x.shape[-1]
    norm = np.sqrt(np.sum(x**2, axis=-1))
    return (
        -20.0 * np.exp(-norm / (5.0 * np.sqrt(d)))
        - np.exp(np.mean(np.cos(2.0 * np.pi * x), axis=-1))
        + 20.0
        + np.e
    )


def _alpine02(x: Array) -> Array:
    # sqrt of a possibly slightly negative argument after displacement
    return -np.prod(np.sqrt(np.abs(x)) * np.sin(x), axis=-1)


def _schwefel22(x: Array) -> Array:
    ax = np.abs(x)
    return np.sum(ax, axis=-1) + np.prod(ax, axis=-1)


def _g08(x: Array) -> Array:
    x1, x2 = x[..., 0], x[..., 1]
    return -(np.sin(2.0 * np.pi * x1) ** 3) * np.sin(2.0 * np.pi * x2) / (x1**3 * (x1 + x2))


def _g08_constraints(x: Array) -> Array:
    x1, x2 = x[..., 0], x[..., 1]
    return np.stack([x1**2 - x2 + 1.0, 1.0 - x1 + (x2 - 4.0) ** 2], axis=-1)


def _g04sq(x: Array) -> Array:
    x1, x3, x5 = x[..., 0], x[..., 2], x[..., 4]
    return (5.3578547 * x3**2 + 0.8356891 * x1 * x5 + 37.293239 * x1 - 10120.0) ** 2


def _g04sq_constraints(x: Array) -> Array:
    x1, x2, x3, x4, x5 = (x[..., t] for t in range(5))
    u = 85334.407 + 5.6858 * x2 * x5 + 0.6262 * x1 * x4 - 2.2053 * x3 * x5
    v = 80512.49 + 7.1317 * x2 * x5 + 2.9955 * x1 * x2 + 2.1813 * x3**2
    w = 9300.961 + 4.7026 * x3 * x5 + 1.2547 * x1 * x3 + 1.9085 * x3 * x4
    return 1e-3 * np.stack([u - 92000.0, -u, v - 110000.0, -v + 90000.0, w - 25000.0, -w + 20000.0], axis=-1)


@dataclass(frozen=True)
class TestProblem:
    """A scaled benchmark problem on ``[0, 1]^d``.

    ``lower``/``upper`` describe the unscaled box, ``x_opt_unscaled`` the
    known minimizer and ``f_opt`` its value. ``displaceable[t]`` is False
    where shifting the objective would move the minimizer (for instance
    when it lies on the boundary).
    """

    __test__ = False  # keep pytest from collecting this class

    name: str
    dim: int
    lower: Array
    upper: Array
    raw_objective: Callable[[Array], Array]
    x_opt_unscaled: Array
    f_opt: float
    raw_constraints: Callable[[Array], Array] | None = None
    displaceable: Array = field(default=None)  # type: ignore[assignment]
    shift: Array = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.displaceable is None:
            object.__setattr__(self, "displaceable", np.ones(self.dim, dtype=bool))
        if self.shift is None:
            object.__setattr__(self, "shift", np.zeros(self.dim))

    @property
    def constrained(self) -> bool:
        return self.raw_constraints is not None

    def unscale(self, x) -> Array:
        x = np.asarray(x, dtype=float) - self.shift
        return self.lower + (self.upper - self.lower) * x

    def scale(self, xbar) -> Array:
        return (np.asarray(xbar, dtype=float) - self.lower) / (self.upper - self.lower)

    @property
    def x_opt(self) -> Array:
        """Minimizer in unit-cube coordinates (including any displacement)."""
        return self.scale(self.x_opt_unscaled) + self.shift

    def objective(self, x) -> Array | float:
        x = np.asarray(x, dtype=float)
        out = self.raw_objective(self.unscale(x))
        return float(out) if x.ndim == 1 else out

    __call__ = objective

    def constraints(self, x) -> Array:
        if self.raw_constraints is None:
            raise DomainError(f"problem {self.name} has no constraints")
        return self.raw_constraints(self.unscale(x))

    def violation(self, x) -> float:
        if self.raw_constraints is None:
            return 0.0
        return float(np.max(np.maximum(self.constraints(x), 0.0)))


ALP02_FACTOR = 2.8081311800070026

_BIVARIATE = {"Bra02", "GoP", "Sch06", "G08"}
PROBLEMS = ("Bra02", "GoP", "Sch06", "Ack", "Alp02", "Sch22", "G08", "G04Sq")


def make_problem(name: str, d: int | None = None) -> TestProblem:
    """Build a benchmark problem by name.

    Bivariate problems and G04Sq have a fixed dimension; the parametric
    families (Ack, Alp02, Sch22) require ``d >= 1``.
    """
    if name not in PROBLEMS:
        raise DomainError(f"unknown problem {name!r}; choose from {', '.join(PROBLEMS)}")
    if name in _BIVARIATE:
        if d not in (None, 2):
            raise DomainError(f"{name} is bivariate, got d={d}")
        d = 2
    elif name == "G04Sq":
        if d not in (None, 5):
            raise DomainError(f"G04Sq has d=5, got d={d}")
        d = 5
    elif d is None or d < 1:
        raise DomainError(f"{name} needs a dimension d >= 1")

    ones = np.ones(d)
    if name == "Bra02":
        return TestProblem(name, 2, np.full(2, -5.0), np.full(2, 15.0), _branin02,
                           np.array([-3.196988424804, 12.52625788532]), 5.558914403894)
    if name == "GoP":
        return TestProblem(name, 2, np.full(2, -2.0), np.full(2, 2.0), _goldstein_price,
                           np.array([0.0, -1.0]), 3e-4)
    if name == "Sch06":
        return TestProblem(name, 2, np.full(2, -6.0), np.full(2, 4.0), _schwefel06,
                           np.array([1.0, 3.0]), 0.0)
    if name == "Ack":
        return TestProblem(name, d, 1.5 * ones, 6.5 * ones, _ackley,
                           1.974451986484 * ones, 6.559645375628)
    if name == "Alp02":
        # the one-dimensional factor max sqrt(x) sin(x) = 2.8081311800070...
        return TestProblem(name, d, 2.0 * ones, 10.0 * ones, _alpine02,
                           7.917052684666 * ones, -(ALP02_FACTOR**d))
    if name == "Sch22":
        return TestProblem(name, d, -3.0 * ones, 7.0 * ones, _schwefel22, np.zeros(d), 0.0)
    if name == "G08":
        return TestProblem(name, 2, np.array([0.5, 3.0]), np.array([2.5, 6.0]), _g08,
                           np.array([1.227971358337, 4.245373366474]), -0.09582504141804,
                           raw_constraints=_g08_constraints)
    # G04Sq: three components of the minimizer sit on the box boundary
    return TestProblem(name, 5, np.array([78.0, 33.0, 27.0, 27.0, 27.0]),
                       np.array([102.0, 45.0, 45.0, 45.0, 45.0]), _g04sq,
                       np.array([78.0, 33.0, 29.995256025682, 45.0, 36.775812905788]), 43.590737882363,
                       raw_constraints=_g04sq_constraints,
                       displaceable=np.array([False, False, True, False, True]))


def random_displacement(problem: TestProblem, seed: int, sigma: float = 0.01) -> Array:
    """Gaussian displacement vector with unsafe components zeroed."""
    a = np.random.default_rng(seed).normal(0.0, sigma, problem.dim)
    return np.where(problem.displaceable, a, 0.0)


def displaced(problem: TestProblem, a=None, seed: int | None = None, sigma: float = 0.01) -> TestProblem:
    """The problem ``x -> f(x - a)``; ``a`` is drawn from ``N(0, sigma^2)`` if omitted."""
    if a is None:
        if seed is None:
            raise DomainError("give either a displacement vector or a seed")
        a = random_displacement(problem, seed, sigma)
    a = np.asarray(a, dtype=float)
    if a.shape != (problem.dim,):
        raise DomainError(f"displacement must have shape ({problem.dim},)")
    a = np.where(problem.displaceable, a, 0.0)
    return replace(problem, shift=problem.shift + a)


def spd_field(d: int = 2, m: int = 3, seed: int = 7, shift: float = 0.1) -> Callable[[Array], Array]:
    """Smooth SPD-valued field ``E(x) = M(x)^T M(x) + shift * I`` on ``[0, 1]^d``.

    The entries of ``M`` are seeded trigonometric waves, so ``M`` is singular
    along curves and ``E`` comes within ``shift`` of losing definiteness there.
    """
    if shift <= 0:
        raise DomainError("shift must be positive for E to be SPD")
    rng = np.random.default_rng(seed)
    amp = rng.uniform(0.5, 2.0, (m, m))
    freq = rng.integers(1, 4, (m, m, d))
    phase = rng.uniform(0.0, 2.0 * np.pi, (m, m))
    eye = np.eye(m)

    def field_at(x) -> Array:
        x = np.asarray(x, dtype=float)
        mat = amp * np.sin(2.0 * np.pi * (freq @ x) + phase)
        return mat.T @ mat + shift * eye

    return field_at
