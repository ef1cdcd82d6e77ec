import numpy as np
import pytest

from dphase.exponents import ExponentField
from dphase.functional import ProblemSpec
from dphase.grid import Grid
from dphase.operator import NonlinearitySpec, PotentialSpec, WeightField


def const_fields(grid, **values):
    return {k: ExponentField.constant(grid, v) for k, v in values.items()}


def build_problem(grid, lam=1.0, mu=0.0, p=2.0, q=2.5, alpha=2.0, delta=1.5,
                  gamma=4.0, s=None, r=3.0, r_star=2.0, theta=3.0,
                  potential_kind="typical", disabled=(), p_field=None,
                  q_field=None, alpha_field=None, ambient_dim=3):
    c = lambda v: ExponentField.constant(grid, v)
    pf = p_field if p_field is not None else c(p)
    qf = q_field if q_field is not None else c(q)
    af = alpha_field if alpha_field is not None else c(alpha)
    sf = c(s if s is not None else max(q, 2.0))
    kw = {}
    if potential_kind in ("weighted", "bcm"):
        kw["a_coef"] = WeightField.gaussian(grid)
    if potential_kind == "weighted":
        kw["b_coef"] = WeightField.constant(grid, 0.5)
    nl = NonlinearitySpec(
        lam=lam, mu=mu,
        a_weight=WeightField.gaussian(grid),
        w_weight=WeightField.gaussian(grid),
        delta=c(delta), gamma=c(gamma), theta=theta,
    )
    problem = ProblemSpec(
        grid=grid, potential=PotentialSpec(potential_kind, pf, qf, **kw),
        alpha=af, nonlinearity=nl, s_field=sf, r_field=c(r),
        r_star_field=c(r_star), ambient_dim=ambient_dim,
        disabled_checks=tuple(disabled),
    )
    problem.validate()
    return problem


@pytest.fixture
def grid_1d():
    return Grid(1, 4.0, 101)


@pytest.fixture
def reference_problem(grid_1d):
    """Coercive regime: lam = 1, mu = 0 on the double-phase potential."""
    return build_problem(grid_1d, lam=1.0, mu=0.0)


@pytest.fixture
def mp_problem(grid_1d):
    """Two-level-geometry regime: mu = 1, small lam."""
    return build_problem(grid_1d, lam=1e-3, mu=1.0)


@pytest.fixture
def semilinear_problem():
    """Classical quadratic potential sanity instance on a wide box."""
    grid = Grid(1, 8.0, 201)
    return build_problem(grid, lam=0.0, mu=1.0, p=2.0, q=2.0, s=2.0,
                         disabled=("p_strictly_below_q",))


@pytest.fixture
def rng():
    return np.random.default_rng(20240801)
