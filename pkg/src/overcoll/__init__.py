"""Oversampled least-squares collocation for periodic boundary integral equations."""

__version__ = "0.1.0"

from .basis import PsiBasisSpec, SplineSpace, eval_bspline, eval_psi, hs_projection, spline_fourier
from .colloc import CollocationGrid, discrete_inner_product, make_grid, max_spacing, quadrature_error_report
from .geometry import Circle, Kite, Polygon, RegularPolygon, make_curve, parametrize, pentagon, speed
from .operators import (OperatorSpec, apply_pseudodiff, boundary_apply, circle_symbol, field_eval,
                        greens_kernel)
from .solver import (DiscreteSystem, Solution, assemble, solve_bubnov_galerkin, solve_galerkin,
                     solve_least_squares, solve_modified)
from .spectral import FourierVector, duality_pairing, fourier_coefficients, sobolev_norm

__all__ = [
    "__version__", "SplineSpace", "PsiBasisSpec", "eval_bspline", "eval_psi", "spline_fourier",
    "hs_projection", "CollocationGrid", "make_grid", "discrete_inner_product", "max_spacing",
    "quadrature_error_report", "Circle", "Kite", "Polygon", "RegularPolygon", "pentagon",
    "make_curve", "parametrize", "speed", "OperatorSpec", "apply_pseudodiff", "greens_kernel",
    "boundary_apply", "circle_symbol", "field_eval", "DiscreteSystem", "Solution", "assemble",
    "solve_least_squares", "solve_modified", "solve_galerkin", "solve_bubnov_galerkin",
    "FourierVector", "fourier_coefficients", "sobolev_norm", "duality_pairing",
]
