"""Discrete energy, its exact gradient (weak-form residual), and pairings.

The energy of a field u is assembled as

    total = sum_cells A(x_c, grad u_c) h^dim            (potential part)
          + sum_nodes |u|^alpha / alpha h^dim           (absorption part)
          - sum_nodes F(x, u) h^dim                     (source part)

with the forward-difference gradient anchored at cell corners.  Because the
nonlinear maps are evaluated pointwise at nodes/cells, the energy is exactly
differentiable in the nodal values and the residual below is its closed-form
gradient scaled by 1/h^dim, i.e. a consistent discretization of
-div A(x, grad u) + |u|^(alpha-2) u - f(x, u).  Vanishing residual
characterizes discrete critical points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dphase import _kernels as kern
from dphase.exponents import (ExponentField, ValidationReport,
                              holder_conjugate, validate_hypotheses)
from dphase.grid import Grid, GridFunction, pad_full
from dphase.operator import NonlinearitySpec, PotentialSpec

__all__ = [
    "ProblemSpec",
    "EnergyReport",
    "energy",
    "residual",
    "residual_norm",
    "residual_dual_norm",
    "monotonicity_pairing",
    "ps_quantity",
]


@dataclass
class ProblemSpec:
    """Full instance of the model: potential, absorption exponent, the
    lower-order term, structural exponent, weight exponents, and the ambient
    dimension used for the exponent calculus (which may exceed the grid
    dimension used for discretization)."""

    grid: Grid
    potential: PotentialSpec
    alpha: ExponentField
    nonlinearity: NonlinearitySpec
    s_field: ExponentField
    r_field: ExponentField
    r_star_field: ExponentField
    ambient_dim: int = 3
    disabled_checks: tuple = ()
    validation: Optional[ValidationReport] = None

    def validate(self) -> ValidationReport:
        self.validation = validate_hypotheses(self)
        return self.validation

    def require_valid(self):
        if self.validation is None:
            self.validate()
        if not self.validation.overall_pass:
            raise ValueError(
                "hypothesis validation failed: "
                + ", ".join(self.validation.failed_names()))

    def with_nonlinearity(self, nl: NonlinearitySpec) -> "ProblemSpec":
        return ProblemSpec(
            grid=self.grid, potential=self.potential, alpha=self.alpha,
            nonlinearity=nl, s_field=self.s_field, r_field=self.r_field,
            r_star_field=self.r_star_field, ambient_dim=self.ambient_dim,
            disabled_checks=self.disabled_checks, validation=self.validation,
        )

    # cached flat samplings used by the assembly loops
    def _assembly(self):
        cache = getattr(self, "_assembly_cache", None)
        if cache is None:
            pv, qv, av, bv = self.potential.cell_fields()
            alpha_int = self.alpha.interior().ravel()
            cache = {
                "pv": pv, "qv": qv, "av": av, "bv": bv,
                "alpha": alpha_int,
                "inv_alpha": 1.0 / alpha_int,
                "alpha_conj": holder_conjugate(self.alpha),
            }
            self._assembly_cache = cache
        return cache


@dataclass
class EnergyReport:
    potential_part: float   # integral of A(x, grad u)
    absorption_part: float  # integral of |u|^alpha / alpha
    source_part: float      # integral of F(x, u)
    total: float

    def to_json_obj(self) -> dict:
        return {
            "potential_part": self.potential_part,
            "absorption_part": self.absorption_part,
            "source_part": self.source_part,
            "total": self.total,
        }


def _grad_mag_cells(u: GridFunction):
    """Forward-difference gradient components and magnitude on cells."""
    grid = u.grid
    full = pad_full(u)
    h = grid.spacing
    base = (slice(0, -1),) * grid.dim
    comps = []
    for k in range(grid.dim):
        up = tuple(slice(1, None) if j == k else slice(0, -1)
                   for j in range(grid.dim))
        comps.append((full[up] - full[base]) / h)
    mag = np.sqrt(sum(c**2 for c in comps))
    return comps, mag


def energy(u: GridFunction, problem: ProblemSpec) -> EnergyReport:
    """Quadrature of the three energy densities; bit-deterministic."""
    if u.lattice != "node" or u.is_vector:
        raise ValueError("energy expects a scalar node function")
    if u.grid != problem.grid:
        raise ValueError("field and problem live on different grids")
    cache = problem._assembly()
    vol = problem.grid.cell_volume

    _, gmag = _grad_mag_cells(u)
    dens = problem.potential.density_array(gmag.ravel(), cache["pv"],
                                           cache["qv"], cache["av"],
                                           cache["bv"])
    pot = kern.comp_sum(dens) * vol

    uflat = u.values.ravel()
    absorb = kern.abs_power_sum_weighted(np.abs(uflat), cache["alpha"],
                                         cache["inv_alpha"]) * vol
    source = kern.comp_sum(problem.nonlinearity.primitive_interior(uflat)) * vol
    return EnergyReport(potential_part=pot, absorption_part=absorb,
                        source_part=source, total=pot + absorb - source)


def residual(u: GridFunction, problem: ProblemSpec) -> GridFunction:
    """Exact gradient of the discrete energy divided by h^dim."""
    lu = _operator_part(u, problem)
    f = problem.nonlinearity.force_interior(u.values.ravel())
    vals = lu - f.reshape(problem.grid.interior_shape)
    return GridFunction(problem.grid, vals)


def _operator_part(u: GridFunction, problem: ProblemSpec) -> np.ndarray:
    """-div A(x, grad u) + |u|^(alpha-2) u on interior nodes (the derivative
    of the potential plus absorption parts)."""
    if u.lattice != "node" or u.is_vector:
        raise ValueError("expected a scalar node function")
    if u.grid != problem.grid:
        raise ValueError("field and problem live on different grids")
    grid = problem.grid
    cache = problem._assembly()
    h = grid.spacing
    dim = grid.dim

    comps, gmag = _grad_mag_cells(u)
    fac = problem.potential.flux_factor_array(
        gmag.ravel(), cache["pv"], cache["qv"], cache["av"], cache["bv"]
    ).reshape(grid.cell_shape)

    acc = np.zeros(grid.full_shape)
    base = (slice(0, -1),) * dim
    for k in range(dim):
        flux_k = fac * comps[k]
        up = tuple(slice(1, None) if j == k else slice(0, -1)
                   for j in range(dim))
        acc[up] += flux_k
        acc[base] -= flux_k
    div_part = acc[(slice(1, -1),) * dim] / h

    uflat = u.values.ravel()
    absorb_force = kern.signed_power(uflat, cache["alpha"])
    return div_part + absorb_force.reshape(grid.interior_shape)


def residual_norm(r: GridFunction) -> float:
    """Discrete L2 norm of the residual density: sqrt(sum r^2 h^dim)."""
    return math.sqrt(kern.dot(r.values, r.values) * r.grid.cell_volume)


def residual_dual_norm(r: GridFunction, problem: ProblemSpec) -> float:
    """Luxemburg norm of the residual with the conjugate absorption
    exponent: a proxy for the dual norm of the energy derivative."""
    from dphase.spaces import luxemburg_norm

    return luxemburg_norm(r, problem._assembly()["alpha_conj"])


def pairing(r: GridFunction, v: GridFunction) -> float:
    """Duality pairing of a residual density with a direction:
    sum r v h^dim, matching the directional derivative of the energy."""
    if not r.same_layout(v):
        raise ValueError("pairing requires matching layouts")
    return kern.dot(r.values, v.values) * r.grid.cell_volume


def monotonicity_pairing(u: GridFunction, v: GridFunction,
                         problem: ProblemSpec) -> float:
    """(L(u) - L(v), u - v) where L collects the potential and absorption
    parts; strict monotonicity of L predicts a positive value for u != v."""
    if np.array_equal(u.values, v.values):
        raise ValueError("monotonicity pairing requires u != v")
    lu = _operator_part(u, problem)
    lv = _operator_part(v, problem)
    return kern.dot(lu - lv, u.values - v.values) * problem.grid.cell_volume


def ps_quantity(u: GridFunction, problem: ProblemSpec) -> float:
    """Energy minus (1/theta) times the derivative paired with u: the
    coercivity quantity solvers log along iterates."""
    e = energy(u, problem)
    r = residual(u, problem)
    return e.total - pairing(r, u) / problem.nonlinearity.theta
