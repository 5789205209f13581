#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

import math

from scipy.special import gamma

# Output Constants ---------------------------------------------------------------------------------

csv_version = "horoflow v1"
csv_columns = [
    "step",
    "t",
    "dt",
    "volume",
    "area",
    "wet",
    "energy",
    "minkowski_residual",
    "sigma2_residual",
    "umbilicity_deficit",
    "rho_min",
    "rho_max",
    "r_fit",
    "min_gXnu",
    "sup_G",
]
csv_float_format = "%.16e" # 17 significant digits.

snapshot_columns_axisymmetric = ["beta", "rho", "u"]
snapshot_columns_full2d       = ["beta", "xi", "rho", "u"]

# Exit Codes ---------------------------------------------------------------------------------------

exit_converged            = 0
exit_budget_exhausted     = 2
exit_star_shapedness_lost = 3
exit_config_error         = 4

# Errors -------------------------------------------------------------------------------------------

class HoroflowError(Exception):
    pass


class ConfigError(HoroflowError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = "line {}: {}".format(line, message)
        HoroflowError.__init__(self, message)
        self.line = line


class StarShapednessLost(HoroflowError):
    def __init__(self, message, state=None):
        HoroflowError.__init__(self, message)
        self.state = state


class QuadratureError(HoroflowError):
    pass

# Helpers ------------------------------------------------------------------------------------------

def sphere_area(k):
    """Area of the unit round sphere S^k."""
    if k == 1:
        return 2*math.pi
    if k == 2:
        return 4*math.pi
    return 2*math.pi**((k + 1)/2)/gamma((k + 1)/2)


def convergence_threshold(n):
    """Bound on |cos θ| under which the flow is known to converge."""
    return (3*n + 1)/(5*n - 1)


def check_cos_theta(cos_theta):
    if not (-1.0 < cos_theta < 1.0):
        raise ValueError("cos(theta) must lie in (-1, 1), got {!r}".format(cos_theta))
    return float(cos_theta)
