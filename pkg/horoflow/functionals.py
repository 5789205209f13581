#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Global functionals of a flow state and the integral identities they satisfy.

Every functional accepts an optional surface bundle `p` (see geometry.surface). When omitted, the
bundle is built from the state's discrete derivatives with the capillary ghosts applied; passing
umbilical.analytic_surface evaluates the same integrals on exact derivatives.
"""

import math
from dataclasses import dataclass, fields

import numpy as np

from horoflow.common import csv_columns, sphere_area
from horoflow.grid import integrate_values
from horoflow.geometry import (surface, support_functions, mean_curvature,
    principal_curvatures_axisym, radial_volume, area_density)
from horoflow.flow import axisymmetrize, normal_speed, scalar_speed, volume_multiplier

# Diagnostics Record -------------------------------------------------------------------------------

@dataclass(frozen=True)
class DiagnosticsRecord:
    step               : int
    t                  : float
    dt                 : float
    volume             : float
    area               : float
    wet                : float
    energy             : float
    minkowski_residual : float
    sigma2_residual    : float
    umbilicity_deficit : float
    rho_min            : float
    rho_max            : float
    r_fit              : float
    min_gXnu           : float
    sup_G              : float
    axisymmetrized     : bool = False # σ₂, deficit and r_fit taken on the ξ-averaged profile.

    def as_row(self):
        return [getattr(self, name) for name in csv_columns]

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

# Helpers ------------------------------------------------------------------------------------------

def _bundle(state, p):
    return surface(state.u, state.cos_theta) if p is None else p


def _integrate_area(state, p, values):
    """∫ values dA over the graph."""
    return float(integrate_values(state.grid, values*area_density(p)))


def _require_axisymmetric(state, what):
    if not state.grid.axisymmetric:
        raise ValueError("{} requires an axisymmetric state (axisymmetrize full2d states)".format(
            what))

# Area, Wetting Area, Energy -----------------------------------------------------------------------

def area(state, p=None):
    """Hyperbolic area ∫ ρⁿ v/x_{n+1}ⁿ dσ."""
    p = _bundle(state, p)
    return float(integrate_values(state.grid, area_density(p)))


def wetted_area(state):
    """Flat area enclosed by the boundary trace on the horosphere."""
    grid = state.grid
    n    = grid.n
    rho_b = np.exp(state.u.values[-1])
    if grid.axisymmetric:
        return float(sphere_area(n - 1)*rho_b**n/n)
    return float(np.sum(rho_b**n)*grid.h_xi/n)


def energy(state, p=None):
    """Capillary energy Area − cosθ·Wet."""
    return area(state, p) - state.cos_theta*wetted_area(state)

# Volume -------------------------------------------------------------------------------------------

def enclosed_volume(state, order=16):
    """Hyperbolic volume of the region between the graph and the horosphere slice."""
    grid = state.grid
    radial = radial_volume(state.rho, grid.cos_beta, grid.n, order)
    return float(integrate_values(grid, np.broadcast_to(radial, grid.shape)))

# Identity Residuals -------------------------------------------------------------------------------

def minkowski_residual(state, p=None):
    """∫(n/x_{n+1} − n cosθ ḡ(x,ν)) dA − ∫ H ḡ(X_{n+1},ν) dA."""
    p = _bundle(state, p)
    n = state.n
    s = support_functions(p)
    weighted = n*p.e_omega - n*state.cos_theta*s.gxnu
    return _integrate_area(state, p, weighted) - _integrate_area(state, p, mean_curvature(p)*s.gXnu)


def sigma2_residual(state, p=None):
    """∫(1/x_{n+1} − cosθ ḡ(x,ν)) H dA − 2/(n−1) ∫ σ₂ ḡ(X_{n+1},ν) dA."""
    _require_axisymmetric(state, "sigma2_residual")
    p = _bundle(state, p)
    n = state.n
    s = support_functions(p)
    kappa_beta, kappa_xi = principal_curvatures_axisym(p)
    sigma2 = math.comb(n - 1, 2)*kappa_xi**2 + (n - 1)*kappa_beta*kappa_xi
    lhs = _integrate_area(state, p, (p.e_omega - state.cos_theta*s.gxnu)*mean_curvature(p))
    rhs = _integrate_area(state, p, sigma2*s.gXnu)
    return lhs - 2/(n - 1)*rhs


def umbilicity_deficit(state, p=None):
    """∫ Σ_{i<j}(κ_i − κ_j)² ḡ(X_{n+1},ν) dA."""
    _require_axisymmetric(state, "umbilicity_deficit")
    p = _bundle(state, p)
    kappa_beta, kappa_xi = principal_curvatures_axisym(p)
    s = support_functions(p)
    # κ_β differs from each of the n − 1 equal parallel curvatures.
    return _integrate_area(state, p, (state.n - 1)*(kappa_beta - kappa_xi)**2*s.gXnu)

# Rates --------------------------------------------------------------------------------------------

def volume_rate(state, p=None):
    """d Vol/dt = ∫ f dA along the flow."""
    p = _bundle(state, p)
    return _integrate_area(state, p, normal_speed(p, state.cos_theta))


def energy_rate(state, p=None):
    """d E/dt = ∫ f H dA along the flow."""
    p = _bundle(state, p)
    return _integrate_area(state, p, normal_speed(p, state.cos_theta)*mean_curvature(p))

# Diagnostics --------------------------------------------------------------------------------------

def diagnostics(state, step=0, dt=0.0, sup_g=None):
    """One time-series row for the state."""
    from horoflow.umbilical import fit_cap

    p = surface(state.u, state.cos_theta)
    if sup_g is None:
        g = scalar_speed(p, state.cos_theta)
        sup_g = float(np.max(np.abs(g - volume_multiplier(state.grid, p, g))))
    a   = area(state, p)
    wet = wetted_area(state)

    axisym = axisymmetrize(state)
    q   = p if axisym is state else surface(axisym.u, axisym.cos_theta)
    fit = fit_cap(axisym, p=q)
    rho = state.rho
    return DiagnosticsRecord(
        step               = int(step),
        t                  = state.t,
        dt                 = float(dt),
        volume             = enclosed_volume(state),
        area               = a,
        wet                = wet,
        energy             = a - state.cos_theta*wet,
        minkowski_residual = minkowski_residual(state, p),
        sigma2_residual    = sigma2_residual(axisym, q),
        umbilicity_deficit = fit.deficit,
        rho_min            = float(np.min(rho)),
        rho_max            = float(np.max(rho)),
        r_fit              = fit.r_fit,
        min_gXnu           = float(np.min(support_functions(p).gXnu)),
        sup_G              = float(sup_g),
        axisymmetrized     = axisym is not state)
