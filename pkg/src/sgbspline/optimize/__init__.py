"""Optimizers, Novak-Ritter grid generation and surrogate-based optimization."""

from __future__ import annotations

from .constrained import CONSTRAINED_METHODS, FeasibilityResult, find_feasible_point, minimize_constrained
from .novak_ritter import RefinementConfig, new_children, novak_ritter_criterion, novak_ritter_generate, ranks
from .optimizers import (
    GRADIENT_FREE_METHODS,
    GRADIENT_METHODS,
    METHODS,
    LineSearchResult,
    OptimizerConfig,
    armijo_line_search,
    minimize_unconstrained,
)
from .pipeline import (
    PipelineResult,
    SurrogateConfig,
    optimize_direct,
    optimize_linear_surrogate,
    optimize_surrogate,
)
from .problem import OptimizationProblem, OptimizerResult, rng_stream

__all__ = [
    "CONSTRAINED_METHODS",
    "FeasibilityResult",
    "GRADIENT_FREE_METHODS",
    "GRADIENT_METHODS",
    "LineSearchResult",
    "METHODS",
    "OptimizationProblem",
    "OptimizerConfig",
    "OptimizerResult",
    "PipelineResult",
    "RefinementConfig",
    "SurrogateConfig",
    "armijo_line_search",
    "find_feasible_point",
    "minimize_constrained",
    "minimize_unconstrained",
    "new_children",
    "novak_ritter_criterion",
    "novak_ritter_generate",
    "optimize_direct",
    "optimize_linear_surrogate",
    "optimize_surrogate",
    "ranks",
    "rng_stream",
]
