"""Hermite spectral solvers for the cubic and derivative nonlinear Schrodinger equations."""

from .basis import analyze, interpolate, l2_norm, sigma_norm, synthesize, synthesize_at_nodes
from .gauge import cumulative_mass, gauge_factor
from .operators import build_free_propagator, differentiate, laplacian_apply, propagate
from .quadrature import QuadratureRule, gauss_hermite_rule
from .schemes import DivergenceError

__version__ = "0.1.0"

__all__ = [
    "analyze", "interpolate", "l2_norm", "sigma_norm", "synthesize", "synthesize_at_nodes",
    "cumulative_mass", "gauge_factor", "build_free_propagator", "differentiate",
    "laplacian_apply", "propagate", "QuadratureRule", "gauss_hermite_rule", "DivergenceError",
]
