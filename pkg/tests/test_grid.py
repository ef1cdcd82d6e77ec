"""Grid, grid functions, discrete gradient, quadrature, serialization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dphase.grid import Grid, GridFunction, cone_function, gradient, integrate


class TestGrid:
    def test_spacing(self):
        g = Grid(1, 1.0, 5)
        assert g.spacing == 0.5
        assert g.full_shape == (5,)
        assert g.interior_shape == (3,)
        assert g.cell_shape == (4,)

    def test_2d_shapes(self):
        g = Grid(2, 2.0, 9)
        assert g.full_shape == (9, 9)
        assert g.n_interior == 49
        assert g.cell_volume == pytest.approx(0.25)

    def test_invalid(self):
        with pytest.raises(ValueError):
            Grid(3, 1.0, 5)
        with pytest.raises(ValueError):
            Grid(1, -1.0, 5)
        with pytest.raises(ValueError):
            Grid(1, 1.0, 2)


class TestGradient:
    def test_zero_field(self):
        g = Grid(1, 1.0, 9)
        assert np.all(gradient(GridFunction.zeros(g)).values == 0.0)

    def test_linear_profile_hand_computed(self):
        # u(x) = x on the interior of [-1, 1] with h = 0.5: interior cells
        # see slope 1, the boundary-adjacent cells see the drop to zero
        g = Grid(1, 1.0, 5)
        u = GridFunction(g, np.array([-0.5, 0.0, 0.5]))
        gv = gradient(u).values.ravel()
        assert gv == pytest.approx([-1.0, 1.0, 1.0, -1.0])

    def test_linearity(self, rng):
        g = Grid(2, 1.5, 8)
        u = GridFunction(g, rng.normal(size=g.interior_shape))
        v = GridFunction(g, rng.normal(size=g.interior_shape))
        lin = gradient(GridFunction(g, 2.0 * u.values - 3.0 * v.values))
        np.testing.assert_allclose(
            lin.values, 2.0 * gradient(u).values - 3.0 * gradient(v).values,
            rtol=0, atol=1e-12)

    def test_constant_interior_supported_on_boundary_cells(self):
        g = Grid(1, 1.0, 11)
        u = GridFunction(g, np.ones(9))
        gv = gradient(u).values.ravel()
        assert gv[0] != 0.0 and gv[-1] != 0.0
        assert np.all(gv[1:-1] == 0.0)

    def test_magnitude_euclidean(self, rng):
        g = Grid(2, 1.0, 6)
        u = GridFunction(g, rng.normal(size=g.interior_shape))
        gr = gradient(u)
        mag = gr.magnitude().values
        np.testing.assert_allclose(
            mag, np.sqrt(np.sum(gr.values**2, axis=-1)), rtol=1e-15)


class TestIntegrate:
    def test_box_measure(self):
        # one cell volume of slack against the box measure
        g = Grid(1, 1.0, 5)
        val = integrate(GridFunction(g, np.ones(3)))
        assert abs(val - 2.0) <= g.spacing + 1e-15

    def test_zero(self):
        g = Grid(1, 1.0, 5)
        assert integrate(GridFunction.zeros(g)) == 0.0

    def test_parabola_quadrature(self):
        # integral of x^2 over [-1, 1] = 2/3, h = 0.01.  The zero boundary
        # extension clips the outermost cells, so the rectangle rule carries
        # a first-order boundary deficiency h (f(-1) + f(1)) / 2; the
        # quadrature must sit within that bound of the analytic value.
        g = Grid(1, 1.0, 201)
        u = GridFunction.from_callable(g, lambda x: x**2)
        err = abs(integrate(u) - 2.0 / 3.0)
        assert err <= 1.5 * g.spacing
        # and the deficiency is explained by the boundary cells
        assert integrate(u) == pytest.approx(2.0 / 3.0 - g.spacing, abs=2e-4)

    def test_linear_monotone(self, rng):
        g = Grid(1, 2.0, 31)
        f = rng.normal(size=29)
        gf = GridFunction(g, f)
        gg = GridFunction(g, f + np.abs(rng.normal(size=29)))
        assert integrate(gf) <= integrate(gg)
        a = integrate(GridFunction(g, 2.0 * f))
        assert a == pytest.approx(2.0 * integrate(gf), rel=1e-13, abs=1e-15)

    def test_refinement_first_order(self):
        vals = []
        for n in (101, 201, 401):
            g = Grid(1, 1.0, n)
            vals.append(integrate(GridFunction.from_callable(
                g, lambda x: np.cos(x))))
        exact = 2.0 * math.sin(1.0)
        errs = [abs(v - exact) for v in vals]
        assert errs[1] < errs[0] and errs[2] < errs[1]

    def test_vector_rejected(self, rng):
        g = Grid(1, 1.0, 9)
        u = GridFunction(g, rng.normal(size=7))
        with pytest.raises(ValueError):
            integrate(gradient(u))


class TestConeFunction:
    def test_apex_value(self):
        g = Grid(1, 4.0, 201)
        h0 = cone_function([0.0], 0.5, g)
        mesh = g.interior_mesh()[0]
        assert h0.values[np.argmin(np.abs(mesh))] == pytest.approx(0.5)

    def test_support_edge(self):
        g = Grid(1, 4.0, 201)
        h0 = cone_function([0.0], 0.5, g)
        mesh = g.interior_mesh()[0]
        assert np.all(h0.values[np.abs(mesh) >= 0.5] == 0.0)

    def test_profile_value(self):
        # eps0 = 0.5, node at distance 0.25 from the center: value 0.25
        g = Grid(1, 1.0, 9)  # h = 0.25
        h0 = cone_function([0.0], 0.5, g)
        mesh = g.interior_mesh()[0]
        k = np.argmin(np.abs(mesh - 0.25))
        assert h0.values[k] == pytest.approx(0.25)

    def test_escaping_ball_rejected(self):
        g = Grid(1, 1.0, 9)
        with pytest.raises(ValueError):
            cone_function([0.8], 0.5, g)

    def test_2d(self):
        g = Grid(2, 2.0, 21)
        h0 = cone_function([0.5, -0.5], 0.4, g)
        assert h0.values.max() == pytest.approx(0.4, abs=g.spacing)


class TestSerialization:
    def test_csv_round_trip_bit_exact(self, rng):
        g = Grid(1, 4.0, 31)
        u = GridFunction(g, rng.normal(size=29) * 10 ** rng.integers(-8, 8))
        v = GridFunction.from_csv(u.to_csv())
        assert v.grid == u.grid
        assert np.array_equal(v.values, u.values)

    def test_json_round_trip_bit_exact(self, rng):
        import json

        g = Grid(2, 1.0, 7)
        u = GridFunction(g, rng.normal(size=g.interior_shape))
        v = GridFunction.from_json_obj(json.loads(json.dumps(u.to_json_obj())))
        assert np.array_equal(v.values, u.values)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False,
                              width=64), min_size=3, max_size=3))
    def test_csv_round_trip_hypothesis(self, vals):
        g = Grid(1, 1.0, 5)
        u = GridFunction(g, np.array(vals))
        v = GridFunction.from_csv(u.to_csv())
        assert np.array_equal(v.values, u.values)

    def test_vector_serialization_rejected(self, rng):
        g = Grid(1, 1.0, 9)
        u = GridFunction(g, rng.normal(size=7))
        with pytest.raises(ValueError):
            gradient(u).to_csv()

    def test_nonfinite_rejected(self):
        g = Grid(1, 1.0, 5)
        with pytest.raises(ValueError):
            GridFunction(g, np.array([1.0, np.nan, 0.0]))
        with pytest.raises(ValueError):
            GridFunction(g, np.array([1.0, np.inf, 0.0]))
