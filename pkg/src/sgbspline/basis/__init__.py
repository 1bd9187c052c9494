"""Univariate hierarchical B-spline bases and tensor-product evaluation."""

from __future__ import annotations

from .bspline import (
    build_knots,
    cardinal_bspline,
    cardinal_bspline_derivative,
    chebyshev_point,
    lagrange_polynomial,
    nonuniform_bspline,
)
from .families import (
    FAMILIES,
    BasisSpec,
    as_tensor_spec,
    basis_derivative,
    basis_value,
    combination,
    tensor_basis_gradient,
    tensor_basis_value,
)
from .fundamental import (
    FundamentalCoefficients,
    fundamental_coefficients,
    modified_fundamental_coefficients,
    weakly_fundamental_coefficients,
)
from .tables import FunctionTable, TensorBasis, piecewise

__all__ = [
    "FAMILIES",
    "BasisSpec",
    "FundamentalCoefficients",
    "FunctionTable",
    "TensorBasis",
    "as_tensor_spec",
    "basis_derivative",
    "basis_value",
    "build_knots",
    "cardinal_bspline",
    "cardinal_bspline_derivative",
    "chebyshev_point",
    "combination",
    "fundamental_coefficients",
    "lagrange_polynomial",
    "modified_fundamental_coefficients",
    "nonuniform_bspline",
    "piecewise",
    "tensor_basis_gradient",
    "tensor_basis_value",
    "weakly_fundamental_coefficients",
]
