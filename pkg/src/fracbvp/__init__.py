"""Numerics for a three-point Caputo boundary value problem of order 2 < alpha < 3.

Green's kernels, existence-condition certificates and Picard solves on uniform
grids over [0, 1].
"""

from .certifier import Certificate, certify, contraction_constant, h4_slack
from .fraccalc import (
    FracOrder,
    SampledFn,
    UniformGrid,
    caputo_deriv,
    embedding_check,
    frac_norm,
    gamma_fn,
    lp_norm,
    rl_integral,
    sup_norm,
)
from .kernels import green_G, green_G_gamma, green_H, green_H_gamma, kernel_bounds_check, kernel_max, tabulate
from .problem import ProblemSpec, builtin_problem, load_problem, parse_problem, validate_spec
from .solver import (
    SolveReport,
    apply_F,
    apply_L,
    fixed_point_solve,
    residual,
    solve_linear,
    translation_modulus,
)

__version__ = "0.1.0"

__all__ = [
    "Certificate",
    "FracOrder",
    "ProblemSpec",
    "SampledFn",
    "SolveReport",
    "UniformGrid",
    "apply_F",
    "apply_L",
    "builtin_problem",
    "caputo_deriv",
    "certify",
    "contraction_constant",
    "embedding_check",
    "fixed_point_solve",
    "frac_norm",
    "gamma_fn",
    "green_G",
    "green_G_gamma",
    "green_H",
    "green_H_gamma",
    "h4_slack",
    "kernel_bounds_check",
    "kernel_max",
    "load_problem",
    "lp_norm",
    "parse_problem",
    "residual",
    "rl_integral",
    "solve_linear",
    "sup_norm",
    "tabulate",
    "translation_modulus",
    "validate_spec",
]
