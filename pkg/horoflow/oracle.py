#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Independent reference computations for the solver.

- Adaptive quadrature (QUADPACK through scipy) on the interval and the half-sphere.
- Observed convergence order from errors on three nested grids.
- Mean curvature of an axisymmetric profile from its meridian curve, bypassing the graph formulas.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from horoflow.common import QuadratureError, sphere_area

logger = logging.getLogger(__name__)

# Quadrature ---------------------------------------------------------------------------------------

def quadrature_oracle(func, a, b, target_tol=1e-12, limit=200):
    """∫_a^b func by adaptive Gauss-Kronrod bisection; QuadratureError if target_tol is not met."""
    out = quad(func, a, b, epsabs=target_tol, epsrel=target_tol, limit=limit, full_output=1)
    value, error = out[0], out[1]
    if len(out) > 3:
        raise QuadratureError("Adaptive quadrature on [{:g}, {:g}] failed: {}".format(
            a, b, out[3].strip().splitlines()[0]))
    if not math.isfinite(value) or error > max(target_tol, target_tol*abs(value))*10:
        raise QuadratureError("Adaptive quadrature on [{:g}, {:g}] reached error {:.3e}".format(
            a, b, error))
    return value


def hemisphere_quadrature(func, n, target_tol=1e-12):
    """∫_{S^n_+} func(β) dσ for an axisymmetric integrand."""
    weighted = lambda beta: func(beta)*math.sin(beta)**(n - 1)
    return sphere_area(n - 1)*quadrature_oracle(weighted, 0.0, math.pi/2, target_tol)


def volume_oracle(profile, n, target_tol=1e-11):
    """Hyperbolic volume under an axisymmetric radial graph ρ = profile(β), nested adaptively."""
    def column(beta):
        c = math.cos(beta)
        return quadrature_oracle(lambda s: s**n/(1 + s*c)**(n + 1), 0.0, float(profile(beta)),
            target_tol)
    return hemisphere_quadrature(column, n, target_tol)

# Convergence Order --------------------------------------------------------------------------------

@dataclass(frozen=True)
class OrderEstimate:
    errors      : tuple
    order_coarse: float
    order_fine  : float
    reason      : str = ""

    @property
    def conclusive(self):
        return not self.reason

    @property
    def order(self):
        """log₂(e_c/e_m), or None when inconclusive."""
        return self.order_coarse if self.conclusive else None

    def as_dict(self):
        return {
            "errors"      : list(self.errors),
            "order"       : self.order,
            "order_coarse": self.order_coarse,
            "order_fine"  : self.order_fine,
            "conclusive"  : self.conclusive,
            "reason"      : self.reason,
        }


def convergence_order(e_coarse, e_medium, e_fine, agreement=0.3):
    """Observed order from errors on grids with spacing h, h/2, h/4."""
    errors = (float(e_coarse), float(e_medium), float(e_fine))
    if not all(math.isfinite(e) and e > 0 for e in errors):
        raise ValueError("Errors must be positive and finite, got {}".format(errors))
    order_coarse = math.log2(errors[0]/errors[1])
    order_fine   = math.log2(errors[1]/errors[2])
    reason = ""
    if not (errors[0] > errors[1] > errors[2]):
        reason = "non-monotone error sequence"
    elif abs(order_coarse - order_fine) > agreement:
        reason = "order estimates disagree by {:.3f}".format(abs(order_coarse - order_fine))
    if reason:
        logger.warning("Inconclusive convergence order: %s (errors %s).", reason, errors)
    return OrderEstimate(errors, order_coarse, order_fine, reason)


def measure_order(error, n_betas, agreement=0.3):
    """Convergence order of error(n_beta) over three node counts doubling the resolution."""
    if len(n_betas) != 3:
        raise ValueError("Three grid sizes are required, got {}".format(len(n_betas)))
    return convergence_order(*(error(n_beta) for n_beta in n_betas), agreement=agreement)

# Curvature Oracle ---------------------------------------------------------------------------------

def fd_curvature_oracle(profile, grid, h=None):
    """
    Hyperbolic mean curvature of the surface of revolution generated by ρ = profile(β).

    The meridian (X, Z) = (ρ sin β, 1 + ρ cos β) is differentiated by centered differences with step
    h (the grid spacing by default). Euclidean curvatures use the outward normal (−Z', X')/s and are
    converted with the conformal factor x_{n+1} = Z.
    """
    if not grid.axisymmetric:
        raise ValueError("Curvature oracle needs an axisymmetric grid")
    h    = grid.h_beta if h is None else h
    beta = grid.beta
    n    = grid.n

    def meridian(b):
        rho = np.asarray(profile(b), dtype=np.float64)
        return rho*np.sin(b), 1 + rho*np.cos(b)

    x_m, z_m = meridian(beta - h)
    x_0, z_0 = meridian(beta)
    x_p, z_p = meridian(beta + h)
    dx  = (x_p - x_m)/(2*h)
    dz  = (z_p - z_m)/(2*h)
    ddx = (x_p - 2*x_0 + x_m)/(h*h)
    ddz = (z_p - 2*z_0 + z_m)/(h*h)
    speed = np.hypot(dx, dz)

    kappa_meridian = (dz*ddx - dx*ddz)/speed**3
    kappa_parallel = np.empty_like(kappa_meridian)
    kappa_parallel[1:] = -dz[1:]/(speed[1:]*x_0[1:])
    kappa_parallel[0]  = kappa_meridian[0] # Umbilic at the pole.

    return z_0*(kappa_meridian + (n - 1)*kappa_parallel) - n*dx/speed
