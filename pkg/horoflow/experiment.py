#!/usr/bin/env python3

#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
HoroFlow experiment driver

Runs are described by a flat YAML configuration (one `key: value` per line, `#` comments):

    n: 2
    mode: axisymmetric
    n_beta: 128
    cos_theta: 0.5
    r0: 1.0
    perturbation: cos2beta
    epsilon: 0.05

Every key has a default; unknown keys are rejected. A run writes to out_dir:
- timeseries.csv: one diagnostics row per record.
- initial.csv / final.csv: snapshots of the radial function.
- report.json: convergence status, conservation and energy checks, residual orders.

Subcommands static-check, convergence-order and radius-from-volume expose the verification tools
and print one JSON line each.
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np
import yaml

from horoflow.common import *
from horoflow.grid import AXISYMMETRIC, FULL2D, grid_modes, build_grid, Field, oblique_slope
from horoflow.geometry import cap_shape
from horoflow.flow import FlowConfig, FlowState, RunStatus, run_to_steady, axisymmetrize
from horoflow.functionals import enclosed_volume, energy, wetted_area, area, minkowski_residual
from horoflow.functionals import energy_rate, umbilicity_deficit
from horoflow.umbilical import (CapSpec, profile_rho, cap_state, analytic_surface, cap_kind,
    cap_volume, radius_from_volume, static_residual, fit_cap)
from horoflow.oracle import convergence_order

logger = logging.getLogger(__name__)

# Configuration ------------------------------------------------------------------------------------

NONE            = "none"
COS2BETA        = "cos2beta"
SIN2BETA_COS2XI = "sin2beta_cos2xi"
RANDOM          = "random"
perturbation_kinds = (NONE, COS2BETA, SIN2BETA_COS2XI, RANDOM)

random_modes = 4

config_types = {
    "n"            : int,
    "mode"         : str,
    "n_beta"       : int,
    "n_xi"         : int,
    "cos_theta"    : float,
    "r0"           : float,
    "perturbation" : str,
    "epsilon"      : float,
    "seed"         : int,
    "c_cfl"        : float,
    "tol_steady"   : float,
    "t_max"        : float,
    "record_every" : int,
    "out_dir"      : str,
}


def _invalid(key, message):
    e = ConfigError("{}: {}".format(key, message))
    e.key = key
    return e


@dataclass(frozen=True)
class ExperimentConfig:
    n            : int   = 2
    mode         : str   = AXISYMMETRIC
    n_beta       : int   = 128
    n_xi         : int   = 128
    cos_theta    : float = 0.5
    r0           : float = 1.0
    perturbation : str   = COS2BETA
    epsilon      : float = 0.05
    seed         : int   = 0
    c_cfl        : float = 0.2
    tol_steady   : float = 1e-8
    t_max        : float = 50.0
    record_every : int   = 100
    out_dir      : str   = "build"
    warnings     : list  = field(default_factory=list, compare=False)

    def __post_init__(self):
        if not (-1 < self.cos_theta < 1):
            raise _invalid("cos_theta", "must lie in (-1, 1), got {!r}".format(self.cos_theta))
        if not (self.r0 > 0) or not math.isfinite(self.r0):
            raise _invalid("r0", "must be positive, got {!r}".format(self.r0))
        if not (self.epsilon >= 0) or not math.isfinite(self.epsilon):
            raise _invalid("epsilon", "must be non-negative, got {!r}".format(self.epsilon))
        if self.seed < 0:
            raise _invalid("seed", "must be non-negative, got {!r}".format(self.seed))
        if self.mode not in grid_modes:
            raise _invalid("mode", "unsupported grid mode {!r}".format(self.mode))
        if self.perturbation not in perturbation_kinds:
            raise _invalid("perturbation", "unsupported kind {!r}".format(self.perturbation))
        if self.perturbation == SIN2BETA_COS2XI and self.mode != FULL2D:
            raise _invalid("perturbation", "sin2beta_cos2xi requires mode full2d")
        try:
            self.grid()
        except ValueError as e:
            key = "n_xi" if "n_xi" in str(e) else "n_beta" if "n_beta" in str(e) else "n"
            raise _invalid(key, str(e))
        try:
            self.flow_config()
        except ValueError as e:
            key = str(e).split()[0]
            raise _invalid(key if key in config_types else "c_cfl", str(e))
        if abs(self.cos_theta) >= convergence_threshold(self.n):
            message = ("|cos_theta| = {:g} is outside the convergence range |cos_theta| < {:.6g} "
                "for n = {}").format(abs(self.cos_theta), convergence_threshold(self.n), self.n)
            if message not in self.warnings:
                self.warnings.append(message)
            logger.warning("%s.", message)

    def grid(self):
        n_xi = self.n_xi if self.mode == FULL2D else None
        return build_grid(self.n, self.mode, self.n_beta, n_xi)

    def flow_config(self):
        return FlowConfig(
            c_cfl        = self.c_cfl,
            tol_steady   = self.tol_steady,
            t_max        = self.t_max,
            record_every = self.record_every)

    def as_dict(self):
        return {key: getattr(self, key) for key in config_types}


def _key_lines(text):
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError:
        return {}
    if not isinstance(node, yaml.MappingNode):
        return {}
    return {k.value: k.start_mark.line + 1 for k, _ in node.value if isinstance(k, yaml.ScalarNode)}


def _coerce(key, value, line):
    kind = config_types[key]
    if isinstance(value, (dict, list)):
        raise ConfigError("{}: expected a scalar value".format(key), line)
    if isinstance(value, bool):
        raise ConfigError("{}: expected {}, got a boolean".format(key, kind.__name__), line)
    try:
        if kind is int:
            number = float(value)
            if not number.is_integer():
                raise ValueError
            return int(number)
        if kind is float:
            return float(value)
        return str(value)
    except (TypeError, ValueError):
        raise ConfigError("{}: cannot convert {!r} to {}".format(key, value, kind.__name__), line)


def parse_config(text):
    """Validated ExperimentConfig from flat YAML text."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise ConfigError("malformed configuration: {}".format(getattr(e, "problem", None) or e),
            mark.line + 1 if mark is not None else None)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a flat mapping of keys to scalars", 1)

    lines  = _key_lines(text)
    values = {}
    for key, value in data.items():
        line = lines.get(key)
        if key not in config_types:
            raise ConfigError("unknown key {!r}".format(key), line)
        if value is None:
            continue
        values[key] = _coerce(key, value, line)
    try:
        return ExperimentConfig(**values)
    except ConfigError as e:
        key = getattr(e, "key", None)
        raise ConfigError(str(e), lines.get(key))


def emit_config(config):
    return yaml.safe_dump(config.as_dict(), sort_keys=False, default_flow_style=False)


def load_config(filename):
    with open(filename) as f:
        return parse_config(f.read())

# Initial Data -------------------------------------------------------------------------------------

def _random_perturbation(config, grid):
    rng = np.random.default_rng(config.seed)
    if grid.axisymmetric:
        k = np.arange(1, random_modes + 1)
        a = config.epsilon*rng.standard_normal(random_modes)/k**2
        # cos 2kβ is even at the pole and flat at the equator.
        return np.log1p(np.sum(a[:, None]*np.cos(2*k[:, None]*grid.beta[None, :]), axis=0))
    m = np.arange(1, random_modes + 1)
    a, b = config.epsilon*rng.standard_normal((2, random_modes))/m
    sb = grid.sin_beta
    xi = grid.xi
    u  = np.zeros(grid.shape)
    for j in range(random_modes):
        # sin^m β e^{imξ} is a polynomial at the pole and has zero β-slope at the equator.
        u += sb**m[j]*(a[j]*np.cos(m[j]*xi) + b[j]*np.sin(m[j]*xi))
    return u


def generate_initial(config):
    """Perturbed cap C_{θ,r0} as the initial state."""
    grid = config.grid()
    spec = CapSpec(config.cos_theta, config.r0, config.n)
    u    = np.log(profile_rho(spec, grid.beta_nodes))
    eps  = config.epsilon

    if config.perturbation == COS2BETA:
        factor = 1 + eps*np.cos(2*grid.beta_nodes)
        if np.any(factor <= 0):
            raise _invalid("epsilon", "{!r} makes the initial radial function non-positive".format(
                eps))
        u = u + np.log(factor)
    elif config.perturbation == SIN2BETA_COS2XI:
        u = u + eps*grid.sin_beta**2*np.cos(2*grid.xi[None, :])
    elif config.perturbation == RANDOM:
        with np.errstate(invalid="ignore", divide="ignore"):
            extra = _random_perturbation(config, grid)
        if not np.all(np.isfinite(extra)):
            raise _invalid("epsilon", "{!r} makes the initial radial function non-positive".format(
                eps))
        u = u + extra

    state = FlowState(grid, Field(grid, np.broadcast_to(u, grid.shape)), 0.0, config.cos_theta)
    logger.info("Initial data: %s perturbation (epsilon = %g) of the cap r0 = %g.",
        config.perturbation, eps, config.r0)
    return state


def initial_bc_violation(state):
    """Largest gap between the one-sided equator slope of u and the capillary value."""
    grid = state.grid
    u    = state.u.values
    h    = grid.h_beta
    slope = (3*u[-1] - 4*u[-2] + u[-3])/(2*h)
    if grid.axisymmetric:
        target = oblique_slope(state.cos_theta)
    else:
        equator = u[-1]
        d_xi    = (np.roll(equator, -1) - np.roll(equator, 1))/(2*grid.h_xi)
        target  = oblique_slope(state.cos_theta, d_xi)
    return float(np.max(np.abs(slope - target)))

# Output -------------------------------------------------------------------------------------------

def write_timeseries(filename, trajectory):
    rows = np.array([record.as_row() for record in trajectory], dtype=np.float64)
    fmt  = ["%d"] + [csv_float_format]*(len(csv_columns) - 1)
    header = "# {}\n{}".format(csv_version, ",".join(csv_columns))
    np.savetxt(filename, rows.reshape(-1, len(csv_columns)), fmt=fmt, delimiter=",",
        header=header, comments="")


def write_snapshot(filename, state):
    grid = state.grid
    if grid.axisymmetric:
        columns = snapshot_columns_axisymmetric
        data = [grid.beta, state.rho, state.u.values]
    else:
        columns = snapshot_columns_full2d
        data = [grid.beta_nodes, grid.xi_nodes, state.rho, state.u.values]
    rows = np.column_stack([np.ravel(d) for d in data])
    np.savetxt(filename, rows, fmt=csv_float_format, delimiter=",",
        header="# {}\n{}".format(csv_version, ",".join(columns)), comments="")

# Reports ------------------------------------------------------------------------------------------

def cap_energy(spec, grid):
    """Energy of the cap by the solver's quadrature on exact derivatives."""
    state = cap_state(spec, grid)
    return area(state, analytic_surface(spec, grid)) - spec.cos_theta*wetted_area(state)


def energy_compare(final, config, initial=None):
    """Final energy against the volume-matched cap C_{θ,r*}."""
    initial = generate_initial(config) if initial is None else initial
    volume0 = enclosed_volume(initial)
    r_star  = radius_from_volume(config.cos_theta, volume0, config.n)
    grid    = build_grid(config.n, AXISYMMETRIC, config.n_beta)
    e_cap   = cap_energy(CapSpec(config.cos_theta, r_star, config.n), grid)
    e_final = energy(final)
    e_initial = energy(initial)
    return {
        "r_star"         : r_star,
        "energy_initial" : e_initial,
        "energy_final"   : e_final,
        "energy_cap"     : e_cap,
        "gap"            : (e_final - e_cap)/abs(e_cap),
        "energy_dropped" : bool(e_initial >= e_final),
    }


def barrier_radii(state, r0):
    """Caps enclosing the initial data, at least as wide as (0.8 r0, 1.2 r0)."""
    radius = state.rho/cap_shape(state.cos_theta, state.grid.beta_nodes)
    return min(0.8*r0, 0.99*float(np.min(radius))), max(1.2*r0, 1.01*float(np.max(radius)))


def residual_orders(config):
    """Static and Minkowski residual orders on N, 2N, 4N axisymmetric grids."""
    n_betas = [config.n_beta, 2*config.n_beta - 1, 4*config.n_beta - 3] # Nested: h, h/2, h/4.
    spec    = CapSpec(config.cos_theta, config.r0, config.n)
    eps     = config.epsilon or 0.05
    def static(n_beta):
        return static_residual(spec, build_grid(config.n, AXISYMMETRIC, n_beta))[0]
    def minkowski(n_beta):
        grid  = build_grid(config.n, AXISYMMETRIC, n_beta)
        u     = np.log(profile_rho(spec, grid.beta)*(1 + eps*np.cos(2*grid.beta)))
        state = FlowState(grid, Field(grid, u), 0.0, config.cos_theta)
        return abs(minkowski_residual(state))
    return {
        "n_beta"    : n_betas,
        "static"    : _order_payload([static(n) for n in n_betas]),
        "minkowski" : _order_payload([minkowski(n) for n in n_betas]),
    }


def _order_payload(errors):
    if max(errors) <= 1e-13:
        return {"errors": errors, "order": None, "conclusive": False, "reason": "exact"}
    try:
        return convergence_order(*errors).as_dict()
    except ValueError as e:
        return {"errors": errors, "order": None, "conclusive": False, "reason": str(e)}


def _final_fit(result):
    try:
        return fit_cap(result.state)
    except (ValueError, StarShapednessLost) as e:
        logger.warning("No cap fit for the final state: %s", e)
        return None


def build_report(config, initial, result, barriers, warnings=None):
    warnings   = list(config.warnings) if warnings is None else warnings
    trajectory = result.trajectory
    if not trajectory:
        return {
            "version"   : csv_version,
            "status"    : result.status.value,
            "converged" : result.converged,
            "message"   : result.message,
            "steps"     : result.steps,
            "warnings"  : warnings,
        }
    volume0  = trajectory[0].volume
    volumes  = np.array([r.volume for r in trajectory])
    final    = result.state
    fit      = _final_fit(result)
    report = {
        "version"              : csv_version,
        "status"               : result.status.value,
        "converged"            : result.converged,
        "message"              : result.message,
        "steps"                : result.steps,
        "t_final"              : final.t,
        "sup_G"                : trajectory[-1].sup_G,
        "volume_initial"       : volume0,
        "volume_final"         : trajectory[-1].volume,
        "volume_drift"         : float(np.max(np.abs(volumes - volume0))/volume0),
        "energy_initial"       : trajectory[0].energy,
        "energy_final"         : trajectory[-1].energy,
        "energy_drop"          : trajectory[0].energy - trajectory[-1].energy,
        "energy_increases"     : result.energy_increases,
        "max_energy_increase"  : result.max_energy_increase,
        "barriers"             : list(barriers),
        "barriers_respected"   : (result.barrier_outside == 0
                                  and all(b.all_inside for b in result.barriers)),
        "barrier_outside"      : result.barrier_outside,
        "r_max_increase"       : result.r_max_rise,
        "r_min_decrease"       : result.r_min_drop,
        "initial_bc_violation" : initial_bc_violation(initial),
        "warnings"             : warnings,
    }
    if fit is not None:
        report["r_fit"]              = fit.r_fit
        report["fit_distance"]       = fit.distance
        report["umbilicity_deficit"] = fit.deficit
        report["axisymmetrized"]     = fit.axisymmetrized
        report["limit_kind"]         = cap_kind(CapSpec(config.cos_theta, fit.r_fit, config.n))
    profile = axisymmetrize(initial)
    report["energy_rate_initial"]  = energy_rate(profile)
    report["deficit_rate_initial"] = -umbilicity_deficit(profile)/(config.n - 1)
    if result.status is not RunStatus.STAR_SHAPEDNESS_LOST and fit is not None:
        compare = energy_compare(final, config, initial)
        e_cap   = compare["energy_cap"]
        report["energy_compare"] = compare
        # Lowest recorded E(t) relative to the volume-matched cap.
        report["energy_floor_margin"] = (min(r.energy for r in trajectory) - e_cap)/abs(e_cap)
        report["cap_volume_match"] = abs(cap_volume(CapSpec(config.cos_theta, fit.r_fit,
            config.n)) - volume0)/volume0
    report["residual_orders"] = residual_orders(config)
    return report

# Run ----------------------------------------------------------------------------------------------

exit_codes = {
    RunStatus.CONVERGED            : exit_converged,
    RunStatus.BUDGET_EXHAUSTED     : exit_budget_exhausted,
    RunStatus.STAR_SHAPEDNESS_LOST : exit_star_shapedness_lost,
}


@dataclass
class ExperimentOutcome:
    exit_code : int
    out_dir   : str
    result    : object = None
    report    : dict   = field(default_factory=dict)


def run_experiment(config, out_dir=None):
    """Run one configuration end to end and write its artifacts."""
    out_dir = config.out_dir if out_dir is None else out_dir
    os.makedirs(out_dir, exist_ok=True)
    try:
        initial = generate_initial(config)
    except ConfigError as e:
        logger.error("Initial data refused: %s", e)
        return ExperimentOutcome(exit_config_error, out_dir)
    write_snapshot(os.path.join(out_dir, "initial.csv"), initial)

    warnings  = list(config.warnings)
    violation = initial_bc_violation(initial)
    if violation > 10*initial.grid.h_beta**2:
        warnings.append("initial BC violation {:.3e}".format(violation))
        logger.warning("Initial data violates the capillary condition by %.3e.", violation)

    barriers = barrier_radii(initial, config.r0)
    result   = run_to_steady(initial, config.flow_config(), barriers)

    write_timeseries(os.path.join(out_dir, "timeseries.csv"), result.trajectory)
    write_snapshot(os.path.join(out_dir, "final.csv"), result.state)
    report = build_report(config, initial, result, barriers, warnings)
    with open(os.path.join(out_dir, "report.json"), "w") as f:
        json.dump(report, f, indent=2)

    exit_code = exit_codes[result.status]
    logger.info("Run finished: %s (exit code %d), artifacts in %s.", result.status.value,
        exit_code, out_dir)
    return ExperimentOutcome(exit_code, out_dir, result, report)

# Commands -----------------------------------------------------------------------------------------

def _emit(payload):
    print(json.dumps(payload, sort_keys=False))


def run_cmd(args):
    try:
        config = load_config(args.config)
    except (ConfigError, OSError) as e:
        logger.error("%s", e)
        _emit({"command": "run", "status": "config error", "exit_code": exit_config_error,
            "error": str(e)})
        return exit_config_error
    outcome = run_experiment(config, args.out_dir)
    status  = outcome.report.get("status", "config error")
    _emit({"command": "run", "status": status, "exit_code": outcome.exit_code,
        "out_dir": outcome.out_dir})
    return outcome.exit_code


def static_check_cmd(args):
    spec = CapSpec(args.cos_theta, args.r, args.n)
    sup_g, identity = [], []
    for n_beta in args.n_beta:
        g, i = static_residual(spec, build_grid(args.n, AXISYMMETRIC, n_beta), args.analytic)
        sup_g.append(g)
        identity.append(i)
    payload = {"command": "static-check", "cos_theta": spec.cos_theta, "r": spec.r, "n": spec.n,
        "n_beta": args.n_beta, "sup_G": sup_g, "identity": identity}
    if len(args.n_beta) == 3:
        payload["order"] = _order_payload(sup_g)
    _emit(payload)
    return 0


def convergence_order_cmd(args):
    estimate = convergence_order(*args.errors)
    _emit(dict(command="convergence-order", **estimate.as_dict()))
    return 0


def radius_from_volume_cmd(args):
    volume = args.volume
    if volume is None:
        volume = cap_volume(CapSpec(args.cos_theta, args.cap_radius, args.n))
    r = radius_from_volume(args.cos_theta, volume, args.n)
    _emit({"command": "radius-from-volume", "cos_theta": args.cos_theta, "n": args.n,
        "volume": volume, "r": r})
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(description="HoroFlow capillary flow experiments")
    parser.add_argument("--log-level", default="WARNING", help="Logging level")
    subparsers = parser.add_subparsers(dest="command", required=True)

    run = subparsers.add_parser("run", help="Run a flow experiment from a YAML config")
    run.add_argument("config", help="YAML config file")
    run.add_argument("--out-dir", default=None, help="Override the configured out_dir")
    run.set_defaults(func=run_cmd)

    static = subparsers.add_parser("static-check", help="Static residual of an umbilical cap")
    static.add_argument("--cos-theta", type=float, default=0.5)
    static.add_argument("--r",         type=float, default=1.0)
    static.add_argument("--n",         type=int,   default=2)
    static.add_argument("--n-beta",    type=int,   nargs="+", default=[65, 129, 257])
    static.add_argument("--analytic",  action="store_true", help="Use exact derivatives")
    static.set_defaults(func=static_check_cmd)

    order = subparsers.add_parser("convergence-order", help="Order from three errors")
    order.add_argument("errors", type=float, nargs=3)
    order.set_defaults(func=convergence_order_cmd)

    radius = subparsers.add_parser("radius-from-volume", help="Cap radius enclosing a volume")
    radius.add_argument("--cos-theta", type=float, default=0.0)
    radius.add_argument("--n",         type=int,   default=2)
    target = radius.add_mutually_exclusive_group(required=True)
    target.add_argument("--volume",     type=float)
    target.add_argument("--cap-radius", type=float, help="Use the volume of the cap of this radius")
    radius.set_defaults(func=radius_from_volume_cmd)

    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, args.log_level.upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ValueError as e:
        logger.error("%s", e)
        _emit({"command": args.command, "error": str(e)})
        return exit_config_error

if __name__ == "__main__":
    sys.exit(main())
