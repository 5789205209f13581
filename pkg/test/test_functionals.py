#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

import math
import unittest

from horoflow.common import *
from horoflow.grid import build_grid, AXISYMMETRIC, FULL2D, Field
from horoflow.flow import FlowState
from horoflow.functionals import *
from horoflow.umbilical import CapSpec, cap_state, analytic_surface, profile_derivatives
from horoflow.oracle import hemisphere_quadrature, volume_oracle, measure_order

from test.model import profiles

umbilical_specs = [CapSpec(0.5, 1.0), CapSpec(-0.5, 2.0), CapSpec(0.0, 0.5), CapSpec(0.3, 0.8, 3)]


def perturbed_state(n_beta, cos_theta=0.5, epsilon=0.1, n=2, r=1.0):
    grid = build_grid(n, AXISYMMETRIC, n_beta)
    return profiles.graph_state(grid, profiles.perturbed_cap_profile(cos_theta, r, epsilon, n),
        cos_theta)


class TestArea(unittest.TestCase):
    def test_centered_sphere(self):
        # ρ ≡ r, θ = π/2: Area = 2πr²/(1 + r).
        errors = 0
        for r in [0.5, 1.0, 2.0]:
            state = cap_state(CapSpec(0.0, r), build_grid(2, AXISYMMETRIC, 129))
            exact = 2*math.pi*r*r/(1 + r)
            errors += profiles.verify_close("area r={}".format(r), area(state), exact, 1e-3*exact)
            errors += profiles.verify_close("energy r={}".format(r), energy(state), area(state),
                0.0)
        self.assertEqual(errors, 0)

    def test_area_order(self):
        def error(n_beta):
            state = cap_state(CapSpec(0.0, 1.0), build_grid(2, AXISYMMETRIC, n_beta))
            return abs(area(state) - math.pi)
        estimate = measure_order(error, profiles.nested_n_betas(33))
        self.assertTrue(estimate.conclusive)
        self.assertGreaterEqual(estimate.order, 1.9)

    def test_umbilical_against_oracle(self):
        for spec in umbilical_specs:
            def density(beta):
                rho, d_beta, _ = profile_derivatives(spec, beta)
                return float((rho/(rho*math.cos(beta) + 1))**spec.n*math.sqrt(1 + d_beta**2))
            grid = build_grid(spec.n, AXISYMMETRIC, 129)
            value = area(cap_state(spec, grid), analytic_surface(spec, grid))
            reference = hemisphere_quadrature(density, spec.n)
            # Trapezoid in β is second order.
            self.assertLess(abs(value - reference), 2*grid.h_beta**2*reference, str(spec))

    def test_full2d_matches_axisymmetric(self):
        spec = CapSpec(0.5, 1.0)
        a = area(cap_state(spec, build_grid(2, AXISYMMETRIC, 33)))
        b = area(cap_state(spec, build_grid(2, FULL2D, 33, 16)))
        self.assertAlmostEqual(a, b, places=10)


class TestWettedArea(unittest.TestCase):
    def test_umbilical(self):
        # Boundary circle of radius r sin θ.
        errors = 0
        for spec in [CapSpec(0.5, 1.0), CapSpec(-0.6, 2.0), CapSpec(0.0, 0.7)]:
            state = cap_state(spec, build_grid(2, AXISYMMETRIC, 17))
            exact = math.pi*(spec.r*math.sin(spec.theta))**2
            errors += profiles.verify_close(str(spec), wetted_area(state), exact, 1e-13)
        self.assertEqual(errors, 0)

    def test_full2d(self):
        grid = build_grid(2, FULL2D, 17, 16)
        state = cap_state(CapSpec(0.0, 1.2), grid)
        self.assertAlmostEqual(wetted_area(state), math.pi*1.44, places=13)

    def test_higher_dimension(self):
        # n = 3: ball of radius r sin θ in the flat horosphere, |S²|ρ³/3.
        state = cap_state(CapSpec(0.0, 1.0, 3), build_grid(3, AXISYMMETRIC, 17))
        self.assertAlmostEqual(wetted_area(state), 4*math.pi/3, places=13)

    def test_energy(self):
        state = perturbed_state(33)
        self.assertEqual(energy(state), area(state) - 0.5*wetted_area(state))


class TestVolume(unittest.TestCase):
    def test_against_oracle(self):
        for spec in [CapSpec(0.5, 1.0), CapSpec(-0.5, 0.5), CapSpec(0.2, 1.0, 3)]:
            state = cap_state(spec, build_grid(spec.n, AXISYMMETRIC, 257))
            reference = volume_oracle(profiles.cap_profile(spec.cos_theta, spec.r, spec.n), spec.n)
            self.assertLess(abs(enclosed_volume(state) - reference), 1e-4*reference, str(spec))

    def test_small_cap(self):
        # Hyperbolic and Euclidean volumes agree to first order as r → 0.
        r = 1e-3
        state = cap_state(CapSpec(0.0, r), build_grid(2, AXISYMMETRIC, 129))
        euclidean = 2*math.pi/3*r**3
        self.assertLess(abs(enclosed_volume(state) - euclidean), 1e-2*euclidean)

    def test_monotone(self):
        grid = build_grid(2, AXISYMMETRIC, 33)
        volumes = [enclosed_volume(cap_state(CapSpec(0.5, r), grid)) for r in [0.25, 0.5, 1, 2, 4]]
        self.assertEqual(volumes, sorted(volumes))
        self.assertEqual(len(set(volumes)), len(volumes))


class TestMinkowski(unittest.TestCase):
    def test_umbilical_analytic(self):
        errors = 0
        for spec in umbilical_specs:
            grid = build_grid(spec.n, AXISYMMETRIC, 257)
            residual = minkowski_residual(cap_state(spec, grid), analytic_surface(spec, grid))
            errors += profiles.verify_below(str(spec), abs(residual), 1e-10)
        self.assertEqual(errors, 0)

    def test_free_boundary_sphere(self):
        for n in [2, 3]:
            state = cap_state(CapSpec(0.0, 1.3, n), build_grid(n, AXISYMMETRIC, 65))
            self.assertLess(abs(minkowski_residual(state)), 1e-12)

    def test_order(self):
        for cos_theta in [0.5, -0.3]:
            estimate = measure_order(
                lambda n_beta: abs(minkowski_residual(perturbed_state(n_beta, cos_theta))),
                profiles.nested_n_betas(33))
            self.assertTrue(estimate.conclusive, estimate.reason)
            self.assertGreaterEqual(estimate.order, 1.9)

    def test_volume_rate(self):
        state = perturbed_state(65)
        self.assertAlmostEqual(volume_rate(state), minkowski_residual(state), places=12)


class TestSigma2(unittest.TestCase):
    def test_umbilical_analytic(self):
        errors = 0
        for spec in umbilical_specs:
            grid = build_grid(spec.n, AXISYMMETRIC, 257)
            residual = sigma2_residual(cap_state(spec, grid), analytic_surface(spec, grid))
            errors += profiles.verify_below(str(spec), abs(residual), 1e-10)
        self.assertEqual(errors, 0)

    def test_perturbed_small(self):
        residuals = [abs(sigma2_residual(perturbed_state(n_beta)))
            for n_beta in profiles.nested_n_betas(33)]
        self.assertLess(residuals[2], residuals[0])
        self.assertLess(residuals[2], 1e-2)

    def test_full2d_rejected(self):
        state = cap_state(CapSpec(0.0, 1.0), build_grid(2, FULL2D, 17, 16))
        with self.assertRaises(ValueError):
            sigma2_residual(state)
        with self.assertRaises(ValueError):
            umbilicity_deficit(state)


class TestDeficit(unittest.TestCase):
    def test_umbilical(self):
        for spec in umbilical_specs:
            grid = build_grid(spec.n, AXISYMMETRIC, 65)
            state = cap_state(spec, grid)
            self.assertLess(umbilicity_deficit(state, analytic_surface(spec, grid)), 1e-20)
        state = cap_state(CapSpec(0.5, 1.0), build_grid(2, AXISYMMETRIC, 129))
        self.assertLess(umbilicity_deficit(state), 1e-6)

    def test_perturbed(self):
        self.assertGreater(umbilicity_deficit(perturbed_state(65)), 1e-4)

    def test_energy_rate(self):
        # dE/dt = −deficit/(n − 1) for capillary graphs.
        for n in [2, 3]:
            state = perturbed_state(129, epsilon=0.2, n=n)
            rate = energy_rate(state)
            deficit = umbilicity_deficit(state)
            self.assertLess(rate, 0.0)
            self.assertLess(abs(rate + deficit/(n - 1)), 5e-2*deficit)


class TestDiagnostics(unittest.TestCase):
    def test_record(self):
        state = perturbed_state(33)
        record = diagnostics(state, step=7, dt=1e-3)
        self.assertEqual(len(record.as_row()), len(csv_columns))
        self.assertEqual(record.as_row()[0], 7)
        self.assertEqual(record.energy, record.area - 0.5*record.wet)
        self.assertEqual(record.volume, enclosed_volume(state))
        self.assertEqual(record.umbilicity_deficit, umbilicity_deficit(state))
        self.assertFalse(record.axisymmetrized)
        self.assertGreater(record.sup_G, 0.0)
        self.assertGreater(record.min_gXnu, 0.0)
        self.assertLess(record.rho_min, record.rho_max)
        self.assertEqual(set(csv_columns) | {"axisymmetrized"}, set(record.as_dict()))

    def test_cap_record(self):
        spec = CapSpec(0.5, 1.3)
        record = diagnostics(cap_state(spec, build_grid(2, AXISYMMETRIC, 33)))
        self.assertAlmostEqual(record.r_fit, 1.3, places=12)

    def test_full2d_record(self):
        state = cap_state(CapSpec(0.5, 1.0), build_grid(2, FULL2D, 17, 16))
        record = diagnostics(state)
        self.assertTrue(record.axisymmetrized)
        self.assertAlmostEqual(record.r_fit, 1.0, places=12)


if __name__ == "__main__":
    unittest.main()
