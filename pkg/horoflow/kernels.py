#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Compiled axisymmetric stepping.

The loops below repeat, node by node, the discretization of grid.differentiate and
flow.scalar_speed for axisymmetric grids, so that long runs advance without building a surface
bundle per stage. flow.py stays the reference: tests compare both paths.
"""

import math

import numpy as np
from numba import njit

# Status -------------------------------------------------------------------------------------------

RUNNING   = 0
CONVERGED = 1
BUDGET    = 2
LOST      = 3

# Step Monitor -------------------------------------------------------------------------------------

# Layout of the monitor array shared by the compiled and the numpy steppers.
M_ENERGY       = 0 # Energy after the last accepted step.
M_INCREASES    = 1 # Steps whose energy rose by more than the slack.
M_MAX_INCREASE = 2
M_OUTSIDE      = 3 # Node-steps outside the barrier caps.
M_R_MAX_LOW    = 4 # Running minimum of r_max.
M_R_MAX_RISE   = 5 # Largest relative rise of r_max above its running minimum.
M_R_MIN_HIGH   = 6 # Running maximum of r_min.
M_R_MIN_DROP   = 7
monitor_size   = 8

energy_slack = 1e-10


@njit(cache=True)
def monitor_update(monitor, energy, r_min, r_max, outside):
    previous = monitor[M_ENERGY]
    increase = energy - previous
    if increase > energy_slack*(1.0 + abs(previous)):
        monitor[M_INCREASES] += 1.0
    if increase > monitor[M_MAX_INCREASE]:
        monitor[M_MAX_INCREASE] = increase
    monitor[M_ENERGY]   = energy
    monitor[M_OUTSIDE] += outside

    if r_max < monitor[M_R_MAX_LOW]:
        monitor[M_R_MAX_LOW] = r_max
    rise = (r_max - monitor[M_R_MAX_LOW])/monitor[M_R_MAX_LOW]
    if rise > monitor[M_R_MAX_RISE]:
        monitor[M_R_MAX_RISE] = rise

    if r_min > monitor[M_R_MIN_HIGH]:
        monitor[M_R_MIN_HIGH] = r_min
    drop = (monitor[M_R_MIN_HIGH] - r_min)/monitor[M_R_MIN_HIGH]
    if drop > monitor[M_R_MIN_DROP]:
        monitor[M_R_MIN_DROP] = drop


@njit(cache=True)
def radius_range(u, cap_shape, r_inner, r_outer, slack):
    """(r_min, r_max, nodes outside the barriers) of the cap radii ρ/P(β)."""
    r_min = math.inf
    r_max = 0.0
    outside = 0
    for i in range(u.shape[0]):
        r = math.exp(u[i])/cap_shape[i]
        r_min = min(r_min, r)
        r_max = max(r_max, r)
        if r_inner > 0.0 and (r < r_inner*(1.0 - slack) or r > r_outer*(1.0 + slack)):
            outside += 1
    return r_min, r_max, outside

# Velocity -----------------------------------------------------------------------------------------

@njit(cache=True)
def axisymmetric_velocity(u, out, sin_beta, cos_beta, cot_beta, weights, n, cos_theta, slope, h):
    """
    Volume-constrained velocity G − μ of an axisymmetric graph, written to out.

    Returns (finite, μ, sup|G − μ|, max x_{n+1}/(ρv), area).
    """
    m  = u.shape[0]
    h2 = h*h
    num  = 0.0
    den  = 0.0
    area = 0.0
    coef_max = 0.0
    finite = True
    for i in range(m):
        u0 = u[i]
        if i == 0:
            d   = 0.0
            hbb = (u[1] - 2.0*u0 + u[1])/h2
            hpp = hbb
        elif i == m - 1:
            d   = slope
            hbb = (8.0*u[m - 2] - u[m - 3] - 7.0*u0 + 6.0*h*slope)/(2.0*h2)
            hpp = cot_beta[i]*d
        else:
            d   = (u[i + 1] - u[i - 1])/(2.0*h)
            hbb = (u[i + 1] - 2.0*u0 + u[i - 1])/h2
            hpp = cot_beta[i]*d
        trace = hbb + (n - 1)*hpp
        v2  = 1.0 + d*d
        v   = math.sqrt(v2)
        ell = trace - d*d*hbb/v2
        rho = math.exp(u0)
        x   = rho*cos_beta[i] + 1.0
        rv  = rho*v
        sd  = sin_beta[i]*d
        g = x*ell/rv + n*d*d/rv + n*sd/v - n*cos_theta/rho*(rho + cos_beta[i] + sd)
        if not math.isfinite(g) or not (rho > 0.0):
            finite = False
        out[i] = g
        q = rho/x
        w = weights[i]*q**(n + 1) # ḡ(X_{n+1},ν) dA/dσ.
        num  += w*g
        den  += w
        area += weights[i]*q**n*v
        coef_max = max(coef_max, x/rv)
    if not finite or not (den > 0.0):
        return False, 0.0, math.inf, coef_max, area
    mu  = num/den
    sup = 0.0
    for i in range(m):
        out[i] -= mu
        sup = max(sup, abs(out[i]))
    return True, mu, sup, coef_max, area

# Stepping -----------------------------------------------------------------------------------------

@njit(cache=True)
def axisymmetric_advance(u, t, t_max, max_steps, c_cfl, tol, sin_beta, cos_beta, cot_beta,
    weights, cap_shape, n, cos_theta, slope, h, wet_coef, r_inner, r_outer, barrier_slack,
    monitor):
    """
    Up to max_steps Heun steps of u in place.

    Returns (status, steps, t, last dt, sup|G − μ|). On LOST, u holds the last valid state.
    """
    m  = u.shape[0]
    g1 = np.empty(m)
    g2 = np.empty(m)
    stage = np.empty(m)
    finite, mu, sup, coef, area = axisymmetric_velocity(u, g1, sin_beta, cos_beta, cot_beta,
        weights, n, cos_theta, slope, h)
    if not finite:
        return LOST, 0, t, 0.0, sup

    steps = 0
    dt    = 0.0
    while steps < max_steps:
        if t >= t_max:
            return BUDGET, steps, t, dt, sup
        if sup < tol:
            return CONVERGED, steps, t, dt, sup
        dt   = c_cfl*h*h/coef
        last = t_max - t <= dt
        if last:
            dt = t_max - t

        for i in range(m):
            stage[i] = u[i] + dt*g1[i]
        finite, mu, sup2, coef2, area2 = axisymmetric_velocity(stage, g2, sin_beta, cos_beta,
            cot_beta, weights, n, cos_theta, slope, h)
        if not finite:
            return LOST, steps, t, dt, sup
        for i in range(m):
            stage[i] = u[i] + 0.5*dt*(g1[i] + g2[i])
        finite, mu, sup2, coef2, area2 = axisymmetric_velocity(stage, g2, sin_beta, cos_beta,
            cot_beta, weights, n, cos_theta, slope, h)
        if not finite:
            return LOST, steps, t, dt, sup

        for i in range(m):
            u[i]  = stage[i]
            g1[i] = g2[i]
        t     = t_max if last else t + dt
        sup   = sup2
        coef  = coef2
        steps += 1

        energy = area2 - cos_theta*wet_coef*math.exp(n*u[m - 1])
        r_min, r_max, outside = radius_range(u, cap_shape, r_inner, r_outer, barrier_slack)
        monitor_update(monitor, energy, r_min, r_max, outside)
    return RUNNING, steps, t, dt, sup
