"""Exponent fields, conjugates, orderings, and the hypothesis validator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dphase.exponents import (ExponentField, holder_conjugate,
                              sobolev_conjugate, strictly_less)
from dphase.grid import Grid
from tests.conftest import build_problem


@pytest.fixture
def grid():
    return Grid(1, 4.0, 201)


class TestExponentField:
    def test_bounds_and_lipschitz(self, grid):
        f = ExponentField.sinusoidal(grid, 2.0, 0.5)
        assert f.inf_val >= 1.5 - 1e-12
        assert f.sup_val <= 2.5 + 1e-12
        assert f.inf_val <= f.values.min() <= f.values.max() <= f.sup_val
        # |d/dx sin| <= 1, so the slope estimate sits near 0.5
        assert f.lipschitz_estimate == pytest.approx(0.5, rel=0.01)

    def test_constant(self, grid):
        f = ExponentField.constant(grid, 3.0)
        assert f.inf_val == f.sup_val == 3.0
        assert f.lipschitz_estimate == 0.0

    def test_views_align(self, grid):
        f = ExponentField.affine(grid, 2.0, [0.1])
        assert f.interior().shape == grid.interior_shape
        assert f.cells().shape == grid.cell_shape
        assert f.interior()[0] == pytest.approx(f.values[1])
        assert f.cells()[0] == pytest.approx(f.values[0])


class TestSobolevConjugate:
    def test_constant_formula(self, grid):
        p = ExponentField.constant(grid, 2.0)
        ps = sobolev_conjugate(p, 3)
        assert np.allclose(ps.values, 6.0)

    def test_sentinel_above_dimension(self, grid):
        p = ExponentField.constant(grid, 2.0)
        ps = sobolev_conjugate(p, 2)
        assert np.all(np.isposinf(ps.values))
        # the sentinel compares above any finite exponent
        assert np.all(ps.values > 1e308)

    def test_variable_nodewise(self, grid):
        p = ExponentField.sinusoidal(grid, 2.0, 0.5)
        ps = sobolev_conjugate(p, 3)
        np.testing.assert_allclose(
            ps.values, 3.0 * p.values / (3.0 - p.values), rtol=1e-14)
        # spot check at x = 0 where p = 2
        k = np.argmin(np.abs(grid.axis_nodes()))
        assert ps.values[k] == pytest.approx(6.0)

    def test_rejects_bad_input(self, grid):
        with pytest.raises(ValueError):
            sobolev_conjugate(ExponentField.constant(grid, 1.0), 3)
        with pytest.raises(ValueError):
            sobolev_conjugate(ExponentField.constant(grid, 2.0), 0)


class TestHolderConjugate:
    def test_self_conjugate(self, grid):
        p = ExponentField.constant(grid, 2.0)
        assert np.allclose(holder_conjugate(p).values, 2.0)

    def test_four_thirds(self, grid):
        p = ExponentField.constant(grid, 4.0)
        assert np.allclose(holder_conjugate(p).values, 4.0 / 3.0)

    def test_affine_endpoints(self):
        # p(x) = 2 + x on [0, 1] mapped onto the box [-1/2, 1/2]
        g = Grid(1, 0.5, 101)
        p = ExponentField.affine(g, 2.5, [1.0])
        pc = holder_conjugate(p)
        assert pc.values[0] == pytest.approx(2.0)   # p = 2 at the left edge
        assert pc.values[-1] == pytest.approx(1.5)  # p = 3 at the right edge

    def test_involution(self, grid):
        p = ExponentField.sinusoidal(grid, 2.2, 0.7)
        back = holder_conjugate(holder_conjugate(p))
        np.testing.assert_allclose(back.values, p.values, rtol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(base=st.floats(1.05, 50.0), amp=st.floats(0.0, 0.04))
    def test_involution_hypothesis(self, base, amp):
        g = Grid(1, 2.0, 31)
        p = ExponentField.sinusoidal(g, base, amp * base)
        back = holder_conjugate(holder_conjugate(p))
        np.testing.assert_allclose(back.values, p.values, rtol=1e-12)

    def test_rejects_at_most_one(self, grid):
        with pytest.raises(ValueError):
            holder_conjugate(ExponentField.constant(grid, 1.0))


class TestStrictlyLess:
    def test_holds_with_margin(self, grid):
        v1 = ExponentField.constant(grid, 2.0)
        v2 = ExponentField.constant(grid, 3.0)
        holds, margin = strictly_less(v1, v2)
        assert holds and margin == pytest.approx(1.0)

    def test_reflexive_fails(self, grid):
        v = ExponentField.constant(grid, 2.0)
        holds, margin = strictly_less(v, v)
        assert not holds and margin == 0.0

    def test_sampled_margin(self, grid):
        # the grid contains nodes close to the sine peak, so the margin
        # approaches 0.1 from above
        v1 = ExponentField.sinusoidal(grid, 2.0, 0.1)
        v2 = ExponentField.constant(grid, 2.2)
        holds, margin = strictly_less(v1, v2)
        assert holds
        assert margin == pytest.approx(0.1, abs=1e-3)

    def test_antisymmetric(self, grid, rng):
        v1 = ExponentField.sinusoidal(grid, 2.0, 0.3)
        v2 = ExponentField.sinusoidal(grid, 2.1, 0.3, frequency=2.0)
        h12, _ = strictly_less(v1, v2)
        h21, _ = strictly_less(v2, v1)
        assert not (h12 and h21)

    def test_grid_mismatch(self):
        v1 = ExponentField.constant(Grid(1, 1.0, 11), 2.0)
        v2 = ExponentField.constant(Grid(1, 1.0, 13), 3.0)
        with pytest.raises(ValueError):
            strictly_less(v1, v2)


class TestValidateHypotheses:
    def test_reference_configuration_passes(self, grid):
        problem = build_problem(grid, lam=1.0, mu=0.0)
        rep = problem.validation
        assert rep.overall_pass, rep.failed_names()
        # both embedding-bound variants pass on this configuration
        assert rep.by_name("alpha_embedding_bound").passed
        assert rep.by_name("alpha_embedding_bound_alt").passed

    def test_spec_chain_arithmetic(self, grid):
        # p=2, q=2.5, N=3 (p*=6), alpha=2, s=2.5, theta=3, gamma=4,
        # delta=1.5, r=2, r*=2: everything passes except the weight
        # exponent compatibility, since r' gamma = 2*4 = 8 > 6 = p*
        problem = build_problem(grid, lam=1.0, mu=0.0, r=2.0)
        rep = problem.validation
        assert not rep.overall_pass
        assert rep.failed_names() == ["w_exponent_compatible"]
        chk = rep.by_name("w_exponent_compatible")
        assert chk.margin == pytest.approx(6.0 / 4.0 - 2.0)

    def test_q_equal_p_fails_strict_ordering(self, grid):
        problem = build_problem(grid, q=2.0, s=2.0)
        rep = problem.validation
        assert not rep.overall_pass
        chk = rep.by_name("p_strictly_below_q")
        assert not chk.passed and chk.margin == 0.0

    def test_delta_alpha_margin(self, grid):
        problem = build_problem(grid, lam=1.0, mu=0.0)
        chk = problem.validation.by_name("delta_below_alpha")
        assert chk.passed and chk.margin == pytest.approx(0.5)

    def test_s_equal_q_nonstrict(self, grid):
        problem = build_problem(grid, s=2.5)
        chk = problem.validation.by_name("s_at_least_q")
        assert chk.passed and chk.margin == pytest.approx(0.0)

    def test_theta_checks(self, grid):
        problem = build_problem(grid, theta=3.0)
        assert problem.validation.by_name(
            "superlinear_threshold_above_s").margin == pytest.approx(0.5)
        assert problem.validation.by_name(
            "superlinear_threshold_within_gamma").margin == pytest.approx(1.0)
        bad = build_problem(grid, theta=2.5)
        assert not bad.validation.by_name(
            "superlinear_threshold_above_s").passed
        assert not bad.validation.overall_pass

    def test_disabled_checks_excluded(self, grid):
        problem = build_problem(grid, q=2.0, s=2.0,
                                disabled=("p_strictly_below_q",))
        assert problem.validation.overall_pass
        assert "p_strictly_below_q" in problem.validation.disabled

    def test_alt_bound_is_informational(self, grid):
        # in ambient dimension 1 the companion bound p*(N-1)/N collapses to
        # zero and must fail without gating the overall verdict
        problem = build_problem(grid, lam=1.0, mu=0.0, p=1.2, q=1.3,
                                alpha=1.1, delta=1.05, gamma=1.3, s=1.3,
                                r=10.0, r_star=10.0, theta=1.35,
                                ambient_dim=1)
        rep = problem.validation
        alt = rep.by_name("alpha_embedding_bound_alt")
        assert not alt.passed and not alt.gating

    def test_json_round_trip(self, grid):
        import json

        problem = build_problem(grid)
        obj = problem.validation.to_json_obj()
        text = json.dumps(obj)
        back = json.loads(text)
        assert back["overall_pass"] == problem.validation.overall_pass
        assert len(back["checks"]) == len(problem.validation.checks)
