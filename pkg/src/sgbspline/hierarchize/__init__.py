"""Hierarchization: computing surpluses from function values on sparse grids."""

from __future__ import annotations

from .bfs import hierarchize_bfs
from .chains import chain, chain_closure, is_chain_closed
from .combination import hierarchize_combination, hierarchize_residual
from .direct import assemble_matrix, condition_estimate, dehierarchize, hierarchize_direct
from .hermite import hermite_regular, hierarchize_hermite
from .refinement import hierarchize_iterative_refinement
from .unidirectional import Pole, dehierarchize_unidirectional, pole_groups, poles, unidirectional_principle

__all__ = [
    "Pole",
    "assemble_matrix",
    "chain",
    "chain_closure",
    "condition_estimate",
    "dehierarchize",
    "dehierarchize_unidirectional",
    "hermite_regular",
    "hierarchize_bfs",
    "hierarchize_combination",
    "hierarchize_direct",
    "hierarchize_hermite",
    "hierarchize_iterative_refinement",
    "hierarchize_residual",
    "is_chain_closed",
    "pole_groups",
    "poles",
    "unidirectional_principle",
]
