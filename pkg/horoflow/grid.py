#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Finite-difference calculus on the upper half-sphere S^n_+.

Nodes are laid out on a uniform latitude grid β ∈ [0, π/2] (β = 0 is the pole, β = π/2 the
equator lying on the horosphere) and, in full2d mode, a periodic longitude grid ξ ∈ [0, 2π).
Every field is padded with one ghost node at each end of the β axis before differencing:
- pole: even reflection (axisymmetric) or antipodal reflection (full2d).
- equator: the capillary (oblique) boundary condition, resolved in closed form.

Derivatives are expressed in the orthonormal frame (∂_β, sin⁻¹β ∂_ξ) of the round metric
σ = dβ² + sin²β dξ², with the covariant Hessian.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from horoflow.common import sphere_area, check_cos_theta

# Constants ----------------------------------------------------------------------------------------

AXISYMMETRIC = "axisymmetric"
FULL2D       = "full2d"
grid_modes   = (AXISYMMETRIC, FULL2D)

min_n_beta = 8
min_n_xi   = 8

# Grid ---------------------------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    n      : int
    mode   : str
    n_beta : int
    n_xi   : int = 1

    @property
    def axisymmetric(self):
        return self.mode == AXISYMMETRIC

    @property
    def h_beta(self):
        return (math.pi/2)/(self.n_beta - 1)

    @property
    def h_xi(self):
        return 2*math.pi/self.n_xi

    @property
    def shape(self):
        return (self.n_beta,) if self.axisymmetric else (self.n_beta, self.n_xi)

    @cached_property
    def beta(self):
        beta = np.arange(self.n_beta)*self.h_beta
        beta[-1] = math.pi/2
        return beta

    @cached_property
    def xi(self):
        return np.arange(self.n_xi)*self.h_xi

    @cached_property
    def sin_beta(self):
        s = np.sin(self.beta)
        s[0]  = 0.0
        s[-1] = 1.0
        return self._column(s)

    @cached_property
    def cos_beta(self):
        c = np.cos(self.beta)
        c[0]  = 1.0
        c[-1] = 0.0
        return self._column(c)

    @cached_property
    def beta_nodes(self):
        """β at every node, broadcast to the grid shape."""
        return np.broadcast_to(self._column(self.beta), self.shape)

    @cached_property
    def xi_nodes(self):
        if self.axisymmetric:
            return np.zeros(self.shape)
        return np.broadcast_to(self.xi[None, :], self.shape)

    def _column(self, a):
        return a if self.axisymmetric else a[:, None]


def build_grid(n, mode=AXISYMMETRIC, n_beta=64, n_xi=None):
    if int(n) != n or n < 2:
        raise ValueError("Dimension n must be an integer >= 2, got {!r}".format(n))
    if mode not in grid_modes:
        raise ValueError("Unsupported grid mode: {}".format(mode))
    if int(n_beta) != n_beta or n_beta < min_n_beta:
        raise ValueError("n_beta must be an integer >= {}, got {!r}".format(min_n_beta, n_beta))
    if mode == FULL2D:
        if n != 2:
            raise ValueError("full2d grids require n = 2, got n = {}".format(n))
        if n_xi is None or int(n_xi) != n_xi or n_xi < min_n_xi:
            raise ValueError("n_xi must be an integer >= {}, got {!r}".format(min_n_xi, n_xi))
        # Antipodal reflection across the pole needs ξ + π on the grid.
        if n_xi % 2:
            raise ValueError("n_xi must be even, got {}".format(n_xi))
        return GridSpec(n=int(n), mode=mode, n_beta=int(n_beta), n_xi=int(n_xi))
    return GridSpec(n=int(n), mode=mode, n_beta=int(n_beta))

# Field --------------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Field:
    grid   : GridSpec
    values : np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.shape != self.grid.shape:
            raise ValueError("Field shape {} does not match grid shape {}".format(
                values.shape, self.grid.shape))
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite")
        if not self.grid.axisymmetric:
            pole  = values[0]
            scale = max(1.0, float(np.max(np.abs(pole))))
            if np.ptp(pole) > 1e-12*scale:
                raise ValueError("Pole ring values must agree across xi")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, grid, func):
        """Sample func(beta, xi) at the nodes."""
        return cls(grid, np.broadcast_to(func(grid.beta_nodes, grid.xi_nodes), grid.shape))

# Ghost Layer --------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GhostedField:
    grid          : GridSpec
    values        : np.ndarray # n_beta + 2 rows: pole ghost, nodes, equator ghost.
    equator_slope : np.ndarray # ∇_β implied by the equator ghost (per ξ in full2d).

    @property
    def nodes(self):
        return self.values[1:-1]


def _pole_ghost(grid, values):
    if grid.axisymmetric:
        return values[1]
    return np.roll(values[1], -grid.n_xi//2)


def pad(f, equator_slope=None):
    """
    Add ghost nodes to a field.

    With equator_slope the equator ghost reproduces that centered slope, otherwise it is
    extrapolated quadratically (one-sided second-order slope).
    """
    grid   = f.grid
    values = f.values
    h      = grid.h_beta
    if equator_slope is None:
        ghost = 3*values[-1] - 3*values[-2] + values[-3]
        equator_slope = (ghost - values[-2])/(2*h)
    else:
        equator_slope = np.broadcast_to(np.asarray(equator_slope, dtype=np.float64),
                                        values[-1].shape).copy()
        ghost = values[-2] + 2*h*equator_slope
    row = (1,) + values.shape[1:]
    ext = np.concatenate([
        np.reshape(_pole_ghost(grid, values), row),
        values,
        np.reshape(ghost, row)])
    return GhostedField(grid, ext, np.asarray(equator_slope))


def oblique_slope(cos_theta, d_xi_equator=0.0):
    """Solve ∇_β u = cosθ·sqrt(1 + |∇u|²) for ∇_β u at the equator (sin β = 1)."""
    sin_theta = math.sqrt(1.0 - cos_theta*cos_theta)
    return cos_theta*np.sqrt(1.0 + np.square(d_xi_equator))/sin_theta


def apply_capillary_ghost(u, cos_theta):
    """Ghost nodes enforcing the capillary contact-angle condition on the log-radius u."""
    cos_theta = check_cos_theta(cos_theta)
    grid = u.grid
    if grid.axisymmetric:
        return pad(u, oblique_slope(cos_theta))
    equator = u.values[-1]
    d_xi    = (np.roll(equator, -1) - np.roll(equator, 1))/(2*grid.h_xi)
    return pad(u, oblique_slope(cos_theta, d_xi))

# Derivatives --------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Derivatives:
    grid   : GridSpec
    d_beta : np.ndarray # ∇_β f.
    d_perp : np.ndarray # sin⁻¹β ∂_ξ f.
    h_bb   : np.ndarray # Covariant Hessian, orthonormal frame.
    h_bp   : np.ndarray
    h_pp   : np.ndarray # Axisymmetric: cot β ∇_β f, multiplicity n - 1.
    trace  : np.ndarray # Σ σ^{ij} f_{ij}.

    @property
    def d_xi(self):
        return self.d_perp*self.grid.sin_beta

    @property
    def grad_sq(self):
        return self.d_beta**2 + self.d_perp**2

    def hessian_quadratic(self):
        """Σ f^i f^j f_{ij}."""
        return (self.d_beta**2*self.h_bb
            + 2*self.d_beta*self.d_perp*self.h_bp
            + self.d_perp**2*self.h_pp)


def _equator_second_derivative(ext, slope, h):
    # One-sided closure using the ghost-implied slope, exact on cubics.
    return (8*ext[-3] - ext[-4] - 7*ext[-2] + 6*h*slope)/(2*h*h)


def _differentiate_axisymmetric(g):
    grid = g.grid
    ext  = g.values
    h    = grid.h_beta

    d_beta = (ext[2:] - ext[:-2])/(2*h)
    d_beta[-1] = g.equator_slope
    h_bb = (ext[2:] - 2*ext[1:-1] + ext[:-2])/(h*h)
    h_bb[-1] = _equator_second_derivative(ext, g.equator_slope, h)

    h_pp = np.empty_like(d_beta)
    h_pp[1:] = grid.cos_beta[1:]/grid.sin_beta[1:]*d_beta[1:]
    h_pp[0]  = h_bb[0] # lim cot β ∇_β f = f_ββ(0).

    zeros = np.zeros_like(d_beta)
    return Derivatives(grid,
        d_beta = d_beta,
        d_perp = zeros,
        h_bb   = h_bb,
        h_bp   = zeros.copy(),
        h_pp   = h_pp,
        trace  = h_bb + (grid.n - 1)*h_pp)


def _pole_frame_derivatives(grid, pole, ring):
    # Gradient and Hessian at the pole in normal coordinates, from the Fourier modes of the
    # adjacent ring (geodesic radius h_beta), then rotated into each node's (∂_β, ∂_⊥) frame.
    h   = grid.h_beta
    xi  = grid.xi
    m   = grid.n_xi
    c1  = 2*np.sum(ring*np.cos(xi))/m
    s1  = 2*np.sum(ring*np.sin(xi))/m
    c2  = 2*np.sum(ring*np.cos(2*xi))/m
    s2  = 2*np.sum(ring*np.sin(2*xi))/m
    gx, gy = c1/h, s1/h
    tr  = 4*(np.mean(ring) - pole)/(h*h)
    axx = tr/2 + 2*c2/(h*h)
    ayy = tr/2 - 2*c2/(h*h)
    axy = 2*s2/(h*h)

    c, s = np.cos(xi), np.sin(xi)
    d_beta = gx*c + gy*s
    d_perp = -gx*s + gy*c
    h_bb = axx*c*c + 2*axy*c*s + ayy*s*s
    h_pp = axx*s*s - 2*axy*c*s + ayy*c*c
    h_bp = (ayy - axx)*c*s + axy*(c*c - s*s)
    return d_beta, d_perp, h_bb, h_bp, h_pp, np.full(m, tr)


def _differentiate_full2d(g):
    grid = g.grid
    ext  = g.values
    h    = grid.h_beta
    hx   = grid.h_xi

    up, mid, dn = ext[3:], ext[2:-1], ext[1:-2] # Rows β_1 … β_{N-1}.
    roll = np.roll

    d_b  = (up - dn)/(2*h)
    d_b[-1] = g.equator_slope
    f_bb = (up - 2*mid + dn)/(h*h)
    f_bb[-1] = _equator_second_derivative(ext, g.equator_slope, h)
    d_x  = (roll(mid, -1, axis=1) - roll(mid, 1, axis=1))/(2*hx)
    f_xx = (roll(mid, -1, axis=1) - 2*mid + roll(mid, 1, axis=1))/(hx*hx)
    f_bx = (roll(up, -1, axis=1) - roll(up, 1, axis=1)
          - roll(dn, -1, axis=1) + roll(dn, 1, axis=1))/(4*h*hx)

    s   = grid.sin_beta[1:]
    cot = grid.cos_beta[1:]/s

    d_beta = np.empty(grid.shape)
    d_perp = np.empty(grid.shape)
    h_bb   = np.empty(grid.shape)
    h_bp   = np.empty(grid.shape)
    h_pp   = np.empty(grid.shape)
    trace  = np.empty(grid.shape)

    d_beta[1:] = d_b
    d_perp[1:] = d_x/s
    h_bb[1:]   = f_bb
    h_bp[1:]   = (f_bx - cot*d_x)/s
    h_pp[1:]   = f_xx/(s*s) + cot*d_b
    trace[1:]  = h_bb[1:] + h_pp[1:]

    (d_beta[0], d_perp[0], h_bb[0], h_bp[0], h_pp[0], trace[0]) = \
        _pole_frame_derivatives(grid, ext[1, 0], ext[2])

    return Derivatives(grid,
        d_beta = d_beta,
        d_perp = d_perp,
        h_bb   = h_bb,
        h_bp   = h_bp,
        h_pp   = h_pp,
        trace  = trace)


def differentiate(g):
    """Second-order derivatives of a ghosted field at every node."""
    if not np.all(np.isfinite(g.values)):
        raise ValueError("Cannot differentiate non-finite values")
    if g.grid.axisymmetric:
        return _differentiate_axisymmetric(g)
    return _differentiate_full2d(g)

# Quadrature ---------------------------------------------------------------------------------------

def integrate_values(grid, values):
    values = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise ValueError("Cannot integrate non-finite values")
    if grid.axisymmetric:
        weight = grid.sin_beta**(grid.n - 1)
        return sphere_area(grid.n - 1)*trapezoid(values*weight, grid.beta)
    # Periodic in ξ: the rectangle rule is the trapezoid rule.
    ring = np.sum(values, axis=1)*grid.h_xi
    return trapezoid(ring*grid.sin_beta[:, 0], grid.beta)


def integrate(f):
    """∫_{S^n_+} f dσ against the round measure."""
    return integrate_values(f.grid, f.values)


def quadrature_weights(grid):
    """Nodal weights w with Σ w·f = integrate_values(grid, f) on an axisymmetric grid."""
    if not grid.axisymmetric:
        raise ValueError("Nodal weights are only available on axisymmetric grids")
    beta = grid.beta
    w = np.empty_like(beta)
    w[1:-1] = (beta[2:] - beta[:-2])/2
    w[0]    = (beta[1] - beta[0])/2
    w[-1]   = (beta[-1] - beta[-2])/2
    return sphere_area(grid.n - 1)*w*grid.sin_beta**(grid.n - 1)
