#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

import numpy as np

from horoflow.grid import Field, build_grid, AXISYMMETRIC
from horoflow.flow import FlowState
from horoflow.umbilical import CapSpec, profile_rho

# Checks -------------------------------------------------------------------------------------------

def verify_close(name, value, reference, tol):
    """Absolute check; returns the number of errors (0 or 1)."""
    if not (abs(value - reference) <= tol):
        print("[Error] {}: {!r} != {!r} (tol {:g})".format(name, value, reference, tol))
        return 1
    return 0


def verify_below(name, value, bound):
    if not (value <= bound):
        print("[Error] {}: {!r} > {!r}".format(name, value, bound))
        return 1
    return 0

# Profiles -----------------------------------------------------------------------------------------

def cap_profile(cos_theta, r, n=2):
    spec = CapSpec(cos_theta, r, n)
    return lambda beta: profile_rho(spec, beta)


def perturbed_cap_profile(cos_theta, r, epsilon, n=2):
    """Cap times (1 + ε cos 2β): even at the pole, same slope as the cap at the equator."""
    spec = CapSpec(cos_theta, r, n)
    return lambda beta: profile_rho(spec, beta)*(1 + epsilon*np.cos(2*np.asarray(beta)))


def graph_state(grid, profile, cos_theta):
    """Axisymmetric profile sampled on any grid."""
    u = np.log(profile(grid.beta_nodes))
    return FlowState(grid, Field(grid, np.broadcast_to(u, grid.shape)), 0.0, cos_theta)


def nested_n_betas(n_beta):
    """Node counts with spacing h, h/2, h/4 sharing their coarse nodes."""
    return [n_beta, 2*n_beta - 1, 4*n_beta - 3]


def axisymmetric_grid(n_beta, n=2):
    return build_grid(n, AXISYMMETRIC, n_beta)

# Fields -------------------------------------------------------------------------------------------

def constant(c):
    return lambda beta, xi: np.full(np.shape(beta), float(c))


def cos_beta(beta, xi):
    return np.cos(beta)


def beta_squared(beta, xi):
    return np.asarray(beta)**2


def mixed_field(beta, xi):
    return np.cos(beta) + np.asarray(beta)**2