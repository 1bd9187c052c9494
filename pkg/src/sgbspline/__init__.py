"""Hierarchical B-splines on sparse grids: interpolation, hierarchization and optimization."""

from __future__ import annotations

from .basis import FAMILIES, BasisSpec, basis_derivative, basis_value
from .exceptions import ConvergenceError, DomainError, HierarchizationError, InfeasibleError
from .grid import (
    LevelIndex,
    SparseGrid,
    coarse_boundary_count,
    interior_point_count,
    regular_grid,
    regular_grid_coarse_boundary,
    regular_point_count,
)
from .hierarchize import hierarchize_direct
from .surrogate import Interpolant, build_spd_surrogate, evaluate, gradient, hessian

__version__ = "0.1.0"

__all__ = [
    "FAMILIES",
    "BasisSpec",
    "ConvergenceError",
    "DomainError",
    "HierarchizationError",
    "InfeasibleError",
    "Interpolant",
    "LevelIndex",
    "SparseGrid",
    "basis_derivative",
    "basis_value",
    "build_spd_surrogate",
    "coarse_boundary_count",
    "evaluate",
    "gradient",
    "hessian",
    "hierarchize_direct",
    "interior_point_count",
    "regular_grid",
    "regular_grid_coarse_boundary",
    "regular_point_count",
]
