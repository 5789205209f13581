#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Pointwise hyperbolic geometry of radial graphs in the upper half-space model.

A hypersurface star-shaped with respect to E_{n+1} is the radial graph x = E_{n+1} + ρ(z)z over
the half-sphere, with u = log ρ. The hyperbolic metric is ḡ = x_{n+1}^{-2}δ and
x_{n+1} = ρ cos β + 1 = e^{-ω}. The normal ν is the ρ-increasing one:
ν_δ = (∂_ρ − ρ⁻¹∇u)/v in the Euclidean picture, ν = x_{n+1}ν_δ.

All functions work node-wise on numpy arrays of any shape.
"""

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from horoflow.grid import apply_capillary_ghost, differentiate

# Surface Data -------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SurfacePointData:
    grid    : object
    beta    : np.ndarray
    xi      : np.ndarray
    rho     : np.ndarray
    u       : np.ndarray
    d_beta  : np.ndarray
    d_perp  : np.ndarray
    v       : np.ndarray
    x       : np.ndarray # x_{n+1}.
    e_omega : np.ndarray # 1/x_{n+1}.
    h_bb    : np.ndarray = None
    h_bp    : np.ndarray = None
    h_pp    : np.ndarray = None
    trace   : np.ndarray = None

    @property
    def n(self):
        return self.grid.n

    @property
    def sin_beta(self):
        return self.grid.sin_beta

    @property
    def cos_beta(self):
        return self.grid.cos_beta

    @property
    def grad_sq(self):
        return self.d_beta**2 + self.d_perp**2

    @property
    def has_hessian(self):
        return self.trace is not None

    @property
    def normal(self):
        """Euclidean normal coefficients on (∂_ρ, ρ⁻¹∂_β, (ρ sin β)⁻¹∂_ξ)."""
        return (1/self.v, -self.d_beta/self.v, -self.d_perp/self.v)

    def hessian_quadratic(self):
        return (self.d_beta**2*self.h_bb
            + 2*self.d_beta*self.d_perp*self.h_bp
            + self.d_perp**2*self.h_pp)

    def elliptic_part(self):
        """Σ (σ^{ij} − u^i u^j/v²) u_{ij}."""
        if not self.has_hessian:
            raise ValueError("Surface data carries no Hessian")
        return self.trace - self.hessian_quadratic()/self.v**2


@dataclass(frozen=True, eq=False)
class SupportTriple:
    gXnu : np.ndarray # ḡ(X_{n+1}, ν).
    gEnu : np.ndarray # ḡ(E_{n+1}, ν).
    gxnu : np.ndarray # ḡ(x, ν).


def pointwise_frame(grid, rho, d_beta, d_perp=0.0):
    """Conformal quantities of a radial graph from ρ and ∇u (no Hessian)."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(~(rho > 0)):
        raise ValueError("Radial function must be positive: star-shaped graph lost")
    d_beta = np.broadcast_to(np.asarray(d_beta, dtype=np.float64), rho.shape)
    d_perp = np.broadcast_to(np.asarray(d_perp, dtype=np.float64), rho.shape)
    v = np.sqrt(1 + d_beta**2 + d_perp**2)
    x = rho*grid.cos_beta + 1
    return SurfacePointData(grid,
        beta    = grid.beta_nodes,
        xi      = grid.xi_nodes,
        rho     = rho,
        u       = np.log(rho),
        d_beta  = d_beta,
        d_perp  = d_perp,
        v       = v,
        x       = x,
        e_omega = 1/x)


def with_hessian(p, h_bb, h_bp, h_pp, trace):
    return replace(p, h_bb=h_bb, h_bp=h_bp, h_pp=h_pp, trace=trace)


def surface(u, cos_theta):
    """Full surface data of the graph u = log ρ, capillary ghosts applied."""
    d = differentiate(apply_capillary_ghost(u, cos_theta))
    p = pointwise_frame(u.grid, np.exp(u.values), d.d_beta, d.d_perp)
    return with_hessian(p, d.h_bb, d.h_bp, d.h_pp, d.trace)

# Support Functions --------------------------------------------------------------------------------

def support_functions(p):
    tangential = p.sin_beta*p.d_beta
    return SupportTriple(
        gXnu = p.rho*p.e_omega/p.v,
        gEnu = p.e_omega*(p.cos_beta + tangential)/p.v,
        gxnu = p.e_omega*(p.rho + p.cos_beta + tangential)/p.v)


def normal_derivative_height(p):
    """D_{ν_δ} x_{n+1}: E_{n+1}-component of the Euclidean normal."""
    return (p.cos_beta + p.sin_beta*p.d_beta)/p.v

# Curvatures ---------------------------------------------------------------------------------------

def mean_curvature(p):
    """Hyperbolic mean curvature with respect to the ρ-increasing normal."""
    n = p.n
    return (-p.x*p.elliptic_part()/(p.rho*p.v)
        + n/(p.rho*p.v)
        - n*p.sin_beta*p.d_beta/p.v)


def euclidean_principal_curvatures_axisym(p):
    """Meridian and parallel curvatures of the surface of revolution in (R^{n+1}, δ)."""
    if not p.grid.axisymmetric:
        raise ValueError("Principal curvatures are only available on axisymmetric grids")
    kappa_beta = (1 - p.h_bb/p.v**2)/(p.rho*p.v)
    kappa_xi   = (1 - p.h_pp)/(p.rho*p.v)
    return kappa_beta, kappa_xi


def principal_curvatures_axisym(p):
    """Hyperbolic principal curvatures (κ_β, κ_ξ); κ_ξ has multiplicity n − 1."""
    kappa_beta, kappa_xi = euclidean_principal_curvatures_axisym(p)
    shift = normal_derivative_height(p)
    return p.x*kappa_beta - shift, p.x*kappa_xi - shift


def umbilic_identity_residual(p, cos_theta, kappa):
    """(1/x_{n+1} − cosθ ḡ(x,ν)) − κ ḡ(X_{n+1},ν): vanishes along an umbilical cap."""
    s = support_functions(p)
    return (p.e_omega - cos_theta*s.gxnu) - kappa*s.gXnu

# Model Caps ---------------------------------------------------------------------------------------

def cap_shape(cos_theta, beta):
    """Radial function of the unit-radius cap |x − (1 − cosθ)E_{n+1}| = 1."""
    s = np.sin(beta)
    return np.sqrt(1 - cos_theta**2*s**2) - cos_theta*np.cos(beta)

# Volume -------------------------------------------------------------------------------------------

@lru_cache(maxsize=None)
def gauss_legendre(order):
    return np.polynomial.legendre.leggauss(order)


def radial_volume(rho, cos_beta, n, order=16):
    """∫_0^ρ s^n/(1 + s cos β)^{n+1} ds along each ray, by Gauss-Legendre quadrature."""
    if order < 8:
        raise ValueError("Radial quadrature order must be >= 8, got {}".format(order))
    nodes, weights = gauss_legendre(order)
    rho = np.asarray(rho, dtype=np.float64)[..., None]
    cos_beta = np.asarray(cos_beta, dtype=np.float64)[..., None]
    s = 0.5*rho*(nodes + 1)
    integrand = s**n/(1 + s*cos_beta)**(n + 1)
    return 0.5*rho[..., 0]*np.sum(weights*integrand, axis=-1)


def area_density(p):
    """Hyperbolic area element relative to dσ: ρⁿ v / x_{n+1}ⁿ."""
    return (p.rho*p.e_omega)**p.n*p.v
