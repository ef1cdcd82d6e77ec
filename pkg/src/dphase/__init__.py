"""dphase: double-phase variable-exponent energies on truncated grids.

Computes variable-exponent modulars and Luxemburg norms, evaluates the
double-phase energy and its exact discrete gradient, verifies the model's
structural hypotheses numerically, and finds critical points (coercive
minimizers, mountain-pass saddles, sign-definite branches, multistart
sweeps).

Hot kernels run in a compiled extension when available; ``dphase.BACKEND``
names the active implementation.
"""

from dphase._kernels import BACKEND
from dphase.exponents import (ExponentField, ValidationReport,
                              holder_conjugate, sobolev_conjugate,
                              strictly_less, validate_hypotheses)
from dphase.functional import (EnergyReport, ProblemSpec, energy,
                               monotonicity_pairing, ps_quantity, residual,
                               residual_norm)
from dphase.grid import Grid, GridFunction, cone_function, gradient, integrate
from dphase.operator import (NonlinearitySpec, PotentialSpec, WeightField,
                             flux, nonlinearity_value, potential_value,
                             truncate_minus, truncate_plus)
from dphase.solvers import (SolverOptions, SolverReport, minimize,
                            mountain_pass, multi_solution_sweep,
                            solve_sign_definite)
from dphase.spaces import (intersection_norm, luxemburg_norm, modular,
                           sum_space_norm, x_norm)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EnergyReport",
    "ExponentField",
    "Grid",
    "GridFunction",
    "NonlinearitySpec",
    "PotentialSpec",
    "ProblemSpec",
    "SolverOptions",
    "SolverReport",
    "ValidationReport",
    "WeightField",
    "cone_function",
    "energy",
    "flux",
    "gradient",
    "holder_conjugate",
    "integrate",
    "intersection_norm",
    "luxemburg_norm",
    "minimize",
    "modular",
    "monotonicity_pairing",
    "mountain_pass",
    "multi_solution_sweep",
    "nonlinearity_value",
    "potential_value",
    "ps_quantity",
    "residual",
    "residual_norm",
    "sobolev_conjugate",
    "solve_sign_definite",
    "strictly_less",
    "sum_space_norm",
    "truncate_minus",
    "truncate_plus",
    "validate_hypotheses",
    "x_norm",
]
