#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Umbilical caps C_{θ,r}: the Euclidean spheres |x − (1 − r cosθ)E_{n+1}| = r cut by the horosphere.

In polar coordinates around E_{n+1} a cap is the radial graph ρ = r·P(β) with
P(β) = √(1 − cos²θ sin²β) − cosθ cos β, and all its principal curvatures equal 1/r − cosθ.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from horoflow.common import check_cos_theta, convergence_threshold, sphere_area
from horoflow.grid import Field, integrate_values
from horoflow.geometry import (cap_shape, pointwise_frame, with_hessian, gauss_legendre,
    radial_volume, umbilic_identity_residual)
from horoflow.flow import FlowState, axisymmetrize, scalar_speed, evaluate
from horoflow.functionals import umbilicity_deficit

logger = logging.getLogger(__name__)

# Constants ----------------------------------------------------------------------------------------

GEODESIC_SPHERE  = "geodesic_sphere"
HOROSPHERE       = "horosphere"
EQUIDISTANT      = "equidistant"
TOTALLY_GEODESIC = "totally_geodesic"

kind_tolerance = 1e-12

# Cap Specification --------------------------------------------------------------------------------

@dataclass(frozen=True)
class CapSpec:
    cos_theta : float
    r         : float
    n         : int = 2

    def __post_init__(self):
        object.__setattr__(self, "cos_theta", check_cos_theta(self.cos_theta))
        if not (self.r > 0) or not math.isfinite(self.r):
            raise ValueError("Cap radius must be positive and finite, got {!r}".format(self.r))
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("Dimension n must be an integer >= 2, got {!r}".format(self.n))

    @property
    def theta(self):
        return math.acos(self.cos_theta)

    @property
    def center_height(self):
        """x_{n+1} of the Euclidean center."""
        return 1 - self.r*self.cos_theta

# Profile ------------------------------------------------------------------------------------------

def profile_rho(spec, beta):
    return spec.r*cap_shape(spec.cos_theta, beta)


def profile_derivatives(spec, beta):
    """Exact (ρ, ∇_β u, ∇²_ββ u) of the cap, u = log ρ."""
    c = spec.cos_theta
    beta = np.asarray(beta, dtype=np.float64)
    sb, cb = np.sin(beta), np.cos(beta)
    s  = np.sqrt(1 - c*c*sb*sb)
    q  = c*c*sb*cb
    s1 = -q/s
    s2 = -c*c*np.cos(2*beta)/s - q*q/s**3
    p0 = s - c*cb
    p1 = s1 + c*sb
    p2 = s2 + c*cb
    d_beta = p1/p0
    return spec.r*p0, d_beta, p2/p0 - d_beta**2


def cap_curvature(spec):
    """Common principal curvature 1/r − cosθ."""
    return 1/spec.r - spec.cos_theta


def cap_kind(spec):
    kappa = cap_curvature(spec)
    if abs(kappa) <= kind_tolerance:
        return TOTALLY_GEODESIC
    if abs(kappa - 1) <= kind_tolerance:
        return HOROSPHERE
    if kappa > 1:
        return GEODESIC_SPHERE
    return EQUIDISTANT


def cap_state(spec, grid, t=0.0):
    """Flow state sampling the cap on a grid."""
    if spec.n != grid.n:
        raise ValueError("Cap dimension {} does not match grid dimension {}".format(spec.n, grid.n))
    u = np.log(profile_rho(spec, grid.beta_nodes))
    return FlowState(grid, Field(grid, u), t, spec.cos_theta)


def analytic_surface(spec, grid):
    """Surface bundle of the cap with exact derivatives in place of finite differences."""
    if spec.n != grid.n:
        raise ValueError("Cap dimension {} does not match grid dimension {}".format(spec.n, grid.n))
    rho, d_beta, h_bb = (np.broadcast_to(a, grid.shape).copy()
        for a in profile_derivatives(spec, grid.beta_nodes))
    h_pp = np.empty(grid.shape)
    h_pp[1:] = grid.cos_beta[1:]/grid.sin_beta[1:]*d_beta[1:]
    h_pp[0]  = h_bb[0]
    p = pointwise_frame(grid, rho, d_beta, 0.0)
    mult = grid.n - 1 if grid.axisymmetric else 1
    return with_hessian(p,
        h_bb  = h_bb,
        h_bp  = np.zeros(grid.shape),
        h_pp  = h_pp,
        trace = h_bb + mult*h_pp)

# Volume -------------------------------------------------------------------------------------------

beta_order   = 64
radial_order = 32

def _beta_quadrature(spec, integrand):
    nodes, weights = gauss_legendre(beta_order)
    beta = math.pi/4*(nodes + 1)
    total = np.sum(weights*integrand(beta)*np.sin(beta)**(spec.n - 1))
    return float(sphere_area(spec.n - 1)*math.pi/4*total)


def cap_volume(spec):
    """Hyperbolic volume enclosed by the cap and the horosphere."""
    return _beta_quadrature(spec,
        lambda beta: radial_volume(profile_rho(spec, beta), np.cos(beta), spec.n, radial_order))


def cap_volume_rate(spec):
    """∂V/∂r = (1/r) ∫ ḡ(X_{n+1},ν) dA over the cap."""
    def integrand(beta):
        rho, _, _ = profile_derivatives(spec, beta)
        # ḡ(X_{n+1},ν)·(dA/dσ) = (ρ e^ω)^{n+1}.
        return (rho/(rho*np.cos(beta) + 1))**(spec.n + 1)
    return _beta_quadrature(spec, integrand)/spec.r


def radius_from_volume(cos_theta, volume, n=2, rtol=1e-10, max_doublings=200):
    """Radius r* of the cap enclosing the given volume."""
    if not (volume > 0):
        raise ValueError("Volume must be positive, got {!r}".format(volume))
    cos_theta = check_cos_theta(cos_theta)
    residual  = lambda r: cap_volume(CapSpec(cos_theta, r, n)) - volume

    lo = hi = 1.0
    if residual(1.0) > 0:
        for _ in range(max_doublings):
            lo /= 2
            if residual(lo) < 0:
                break
        else:
            raise ValueError("Could not bracket the radius for volume {!r}".format(volume))
        hi = 2*lo
    elif residual(1.0) < 0:
        for _ in range(max_doublings):
            hi *= 2
            if residual(hi) > 0:
                break
        else:
            raise ValueError("Could not bracket the radius for volume {!r}".format(volume))
        lo = hi/2
    else:
        return 1.0
    logger.debug("Radius bracket [%g, %g] for volume %g.", lo, hi, volume)
    return bisect(residual, lo, hi, xtol=1e-3*rtol*lo, rtol=rtol, maxiter=500)

# Static Check -------------------------------------------------------------------------------------

def static_residual(spec, grid, analytic=False):
    """
    (sup|G|, sup|umbilic identity residual|) on the sampled cap.

    With analytic=True the exact derivatives replace the discrete ones.
    """
    kappa = cap_curvature(spec)
    if analytic:
        p = analytic_surface(spec, grid)
        g = scalar_speed(p, spec.cos_theta)
    else:
        p, g = evaluate(cap_state(spec, grid))
    identity = umbilic_identity_residual(p, spec.cos_theta, kappa)
    return float(np.max(np.abs(g))), float(np.max(np.abs(identity)))

# Fitting ------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class CapFit:
    r_fit          : float
    distance       : float # L²(dσ) distance between ρ and the fitted profile.
    deficit        : float
    axisymmetrized : bool


def fit_cap(state, p=None):
    """Closest cap C_{θ,r} to the state's profile; ρ = r·P(β) is linear in r."""
    axisym = axisymmetrize(state)
    if axisym is not state:
        p = None
    grid  = axisym.grid
    shape = cap_shape(axisym.cos_theta, grid.beta)
    rho   = axisym.rho
    r_fit = integrate_values(grid, rho*shape)/integrate_values(grid, shape*shape)
    distance = math.sqrt(max(integrate_values(grid, (rho - r_fit*shape)**2), 0.0))
    return CapFit(
        r_fit          = float(r_fit),
        distance       = distance,
        deficit        = umbilicity_deficit(axisym, p),
        axisymmetrized = axisym is not state)

# Convergence Range --------------------------------------------------------------------------------

def in_convergence_range(n, cos_theta):
    return abs(cos_theta) < convergence_threshold(n)
