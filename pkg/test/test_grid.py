#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

import math
import unittest

import numpy as np

from horoflow.common import *
from horoflow.grid import *
from horoflow.oracle import measure_order

from test.model import profiles


def max_error(values, reference):
    return float(np.max(np.abs(values - reference)))


class TestGrid(unittest.TestCase):
    def test_build_grid_nodes(self):
        grid = build_grid(2, AXISYMMETRIC, 9)
        np.testing.assert_allclose(grid.beta, np.arange(9)*math.pi/16, rtol=0, atol=1e-15)
        self.assertEqual(grid.beta[0], 0.0)
        self.assertEqual(grid.beta[-1], math.pi/2)
        self.assertEqual(grid.shape, (9,))

    def test_build_grid_spacing(self):
        grid = build_grid(3, AXISYMMETRIC, 64)
        self.assertEqual(grid.h_beta, (math.pi/2)/63)

    def test_build_grid_full2d(self):
        grid = build_grid(2, FULL2D, 64, 128)
        self.assertEqual(grid.shape, (64, 128))
        self.assertAlmostEqual(grid.h_xi, 2*math.pi/128, places=15)
        self.assertEqual(grid.sin_beta.shape, (64, 1))
        self.assertEqual(grid.beta_nodes.shape, (64, 128))

    def test_build_grid_errors(self):
        with self.assertRaises(ValueError):
            build_grid(3, FULL2D, 64, 128)
        with self.assertRaises(ValueError):
            build_grid(2, AXISYMMETRIC, 7)
        with self.assertRaises(ValueError):
            build_grid(2, FULL2D, 64, 7)
        with self.assertRaises(ValueError):
            build_grid(2, FULL2D, 64, 9)
        with self.assertRaises(ValueError):
            build_grid(1, AXISYMMETRIC, 64)
        with self.assertRaises(ValueError):
            build_grid(2, "spherical", 64)


class TestField(unittest.TestCase):
    def test_field_shape(self):
        grid = build_grid(2, AXISYMMETRIC, 9)
        with self.assertRaises(ValueError):
            Field(grid, np.zeros(10))

    def test_field_finite(self):
        grid = build_grid(2, AXISYMMETRIC, 9)
        values = np.zeros(9)
        values[3] = np.nan
        with self.assertRaises(ValueError):
            Field(grid, values)
        values[3] = np.inf
        with self.assertRaises(ValueError):
            Field(grid, values)

    def test_field_pole_ring(self):
        grid = build_grid(2, FULL2D, 9, 8)
        values = np.zeros(grid.shape)
        values[0, 3] = 1e-3
        with self.assertRaises(ValueError):
            Field(grid, values)
        values[0, :] = 0.25
        Field(grid, values)


class TestDifferentiate(unittest.TestCase):
    def test_constant(self):
        errors = 0
        for grid in [build_grid(2, AXISYMMETRIC, 17), build_grid(4, AXISYMMETRIC, 17),
                     build_grid(2, FULL2D, 17, 16)]:
            d = differentiate(pad(Field.from_function(grid, profiles.constant(0.7))))
            for name in ["d_beta", "d_perp", "h_bb", "h_bp", "h_pp", "trace"]:
                errors += profiles.verify_below(name, max_error(getattr(d, name), 0.0), 1e-12)
        self.assertEqual(errors, 0)

    def test_cos_beta(self):
        grid = build_grid(2, AXISYMMETRIC, 129)
        d = differentiate(pad(Field.from_function(grid, profiles.cos_beta), equator_slope=-1.0))
        self.assertLess(max_error(d.d_beta, -np.sin(grid.beta)), 1e-4)
        self.assertLess(max_error(d.trace, -2*np.cos(grid.beta)), 1e-4)

    def test_cos_beta_order(self):
        def error(n_beta, name, reference):
            grid = build_grid(2, AXISYMMETRIC, n_beta)
            f = Field.from_function(grid, profiles.cos_beta)
            d = differentiate(pad(f, equator_slope=-1.0))
            return max_error(getattr(d, name), reference(grid.beta))
        n_betas = profiles.nested_n_betas(33)
        references = [("d_beta", lambda b: -np.sin(b)), ("trace", lambda b: -2*np.cos(b))]
        for name, reference in references:
            estimate = measure_order(lambda n_beta: error(n_beta, name, reference), n_betas)
            self.assertTrue(estimate.conclusive, name)
            self.assertGreaterEqual(estimate.order, 1.9, name)

    def test_pole_limit(self):
        # cot β·f_β → f_ββ(0) at the pole: trace of β² is 2n there.
        for n in [2, 3, 5]:
            grid = build_grid(n, AXISYMMETRIC, 33)
            d = differentiate(pad(Field.from_function(grid, profiles.beta_squared),
                equator_slope=math.pi))
            self.assertAlmostEqual(d.trace[0], 2*n, places=10)
            self.assertAlmostEqual(d.h_bb[0], 2.0, places=10)

    def test_affine_exact(self):
        grid = build_grid(3, AXISYMMETRIC, 33)
        f = Field.from_function(grid, lambda beta, xi: 2*beta + 1)
        d = differentiate(pad(f, equator_slope=2.0))
        self.assertLess(max_error(d.d_beta[1:], 2.0), 1e-12)
        self.assertLess(max_error(d.h_bb[1:], 0.0), 1e-9)

    def test_full2d_matches_axisymmetric(self):
        slope = math.pi - 1 # Exact β-slope of cos β + β² at the equator.
        axi = build_grid(2, AXISYMMETRIC, 17)
        full = build_grid(2, FULL2D, 17, 16)
        da = differentiate(pad(Field.from_function(axi, profiles.mixed_field), slope))
        df = differentiate(pad(Field.from_function(full, profiles.mixed_field), slope))
        errors = 0
        for name in ["d_beta", "h_bb", "h_pp", "trace"]:
            reference = getattr(da, name)[:, None]
            errors += profiles.verify_below(name, max_error(getattr(df, name), reference), 1e-11)
        errors += profiles.verify_below("d_perp", max_error(df.d_perp[1:], 0.0), 0.0)
        errors += profiles.verify_below("h_bp", max_error(df.h_bp[1:], 0.0), 0.0)
        self.assertEqual(errors, 0)

    def test_full2d_xi_derivatives(self):
        # cos ξ sin β is the linear function x₁; its Hessian on the sphere is −x₁σ.
        grid = build_grid(2, FULL2D, 65, 64)
        f = Field.from_function(grid, lambda beta, xi: np.sin(beta)*np.cos(xi))
        g = pad(f, equator_slope=0.0)
        d = differentiate(g)
        x1 = np.sin(grid.beta_nodes)*np.cos(grid.xi_nodes)
        # The ξ stencil error grows like 1/sin β towards the pole ring.
        away = grid.beta >= math.pi/6
        self.assertLess(max_error(d.trace[away], -2*x1[away]), 5e-3)
        self.assertLess(abs(float(d.trace[0, 0])), 1e-10)
        self.assertLess(max_error(d.d_perp, -np.sin(grid.xi_nodes)), 5e-3)

    def test_non_finite(self):
        grid = build_grid(2, AXISYMMETRIC, 9)
        g = pad(Field(grid, np.zeros(9)))
        values = g.values.copy()
        values[0] = np.nan
        with self.assertRaises(ValueError):
            differentiate(GhostedField(grid, values, g.equator_slope))


class TestCapillaryGhost(unittest.TestCase):
    def centered_slope(self, g):
        return (g.values[-1] - g.values[-3])/(2*g.grid.h_beta)

    def test_free_boundary(self):
        grid = build_grid(2, AXISYMMETRIC, 17)
        g = apply_capillary_ghost(Field.from_function(grid, profiles.cos_beta), 0.0)
        self.assertEqual(float(self.centered_slope(g)), 0.0)

    def test_oblique_axisymmetric(self):
        grid = build_grid(2, AXISYMMETRIC, 17)
        g = apply_capillary_ghost(Field.from_function(grid, profiles.cos_beta), 0.5)
        slope = float(self.centered_slope(g))
        self.assertAlmostEqual(slope, 0.5/math.sqrt(0.75), places=12)
        self.assertAlmostEqual(slope, 0.5*math.sqrt(1 + slope**2), places=12)

    def test_oblique_full2d(self):
        grid = build_grid(2, FULL2D, 17, 32)
        f = Field.from_function(grid, lambda beta, xi: 0.3*np.sin(beta)**2*np.cos(2*xi))
        equator = f.values[-1]
        d_xi = (np.roll(equator, -1) - np.roll(equator, 1))/(2*grid.h_xi)
        for cos_theta in [-0.4, 0.0, 0.6]:
            g = apply_capillary_ghost(f, cos_theta)
            slope = self.centered_slope(g)
            relation = cos_theta*np.sqrt(1 + slope**2 + d_xi**2)
            self.assertLess(max_error(slope, relation), 1e-12)
            if cos_theta == 0.0:
                self.assertEqual(max_error(slope, 0.0), 0.0)

    def test_pole_ghost_full2d(self):
        grid = build_grid(2, FULL2D, 9, 8)
        f = Field.from_function(grid, lambda beta, xi: np.sin(beta)*np.cos(xi))
        g = apply_capillary_ghost(f, 0.0)
        # Antipodal reflection: the ghost at ξ is the first ring at ξ + π.
        np.testing.assert_allclose(g.values[0], -g.values[2], rtol=0, atol=1e-15)

    def test_invalid_angle(self):
        grid = build_grid(2, AXISYMMETRIC, 9)
        for cos_theta in [1.0, -1.0, 1.5]:
            with self.assertRaises(ValueError):
                apply_capillary_ghost(Field(grid, np.zeros(9)), cos_theta)


class TestIntegrate(unittest.TestCase):
    def test_examples(self):
        errors = 0
        grid = build_grid(2, AXISYMMETRIC, 129)
        errors += profiles.verify_close("one", integrate(Field.from_function(grid,
            profiles.constant(1))), 2*math.pi, 1e-3)
        errors += profiles.verify_close("cos", integrate(Field.from_function(grid,
            profiles.cos_beta)), math.pi, 1e-3)
        errors += profiles.verify_close("sin", integrate(Field.from_function(grid,
            lambda beta, xi: np.sin(beta))), math.pi**2/2, 1e-3)
        grid = build_grid(3, AXISYMMETRIC, 129)
        errors += profiles.verify_close("one n=3", integrate(Field.from_function(grid,
            profiles.constant(1))), math.pi**2, 1e-3)
        self.assertEqual(errors, 0)

    def test_order(self):
        def error(n_beta):
            grid = build_grid(2, AXISYMMETRIC, n_beta)
            return abs(integrate(Field.from_function(grid, profiles.cos_beta)) - math.pi)
        estimate = measure_order(error, profiles.nested_n_betas(33))
        self.assertTrue(estimate.conclusive)
        self.assertGreaterEqual(estimate.order, 1.9)

    def test_full2d_matches_axisymmetric(self):
        axi = build_grid(2, AXISYMMETRIC, 33)
        full = build_grid(2, FULL2D, 33, 16)
        a = integrate(Field.from_function(axi, profiles.mixed_field))
        b = integrate(Field.from_function(full, profiles.mixed_field))
        self.assertAlmostEqual(a, b, places=12)

    def test_quadrature_weights(self):
        for n in [2, 3]:
            grid = build_grid(n, AXISYMMETRIC, 33)
            values = Field.from_function(grid, profiles.mixed_field).values
            weights = quadrature_weights(grid)
            self.assertAlmostEqual(np.sum(weights*values), integrate_values(grid, values),
                places=13)
            self.assertEqual(weights[0], 0.0)
        with self.assertRaises(ValueError):
            quadrature_weights(build_grid(2, FULL2D, 17, 16))

    def test_sphere_area(self):
        self.assertEqual(sphere_area(1), 2*math.pi)
        self.assertEqual(sphere_area(2), 4*math.pi)
        self.assertAlmostEqual(sphere_area(3), 2*math.pi**2, places=12)


if __name__ == "__main__":
    unittest.main()
