#
# This file is part of HoroFlow.
#
# Copyright (c) 2026 HoroFlow Developers
# SPDX-License-Identifier: BSD-2-Clause

"""
Volume-preserving capillary flow of radial graphs in a horoball.

The graph u = log ρ evolves by u_t = G(∇²u, ∇u, ρ, β) = v f/(ρ e^ω), with the normal speed
f = n/x_{n+1} − n cosθ ḡ(x,ν) − H ḡ(X_{n+1},ν), under the capillary boundary condition
∇_β u = cosθ·v on the equator. Time stepping is explicit two-stage Runge-Kutta (Heun) with
a parabolic CFL bound.

The discrete caps are static only up to O(h²), so the scheme advances u_t = G − μ, where the
constant μ = ∫ f dA / ∫ ḡ(X_{n+1},ν) dA cancels the discrete volume rate. By the weighted
Minkowski formula μ vanishes for the exact flow.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from horoflow import kernels
from horoflow.common import (StarShapednessLost, check_cos_theta, convergence_threshold,
    sphere_area)
from horoflow.grid import (Field, build_grid, integrate_values, oblique_slope, quadrature_weights,
    AXISYMMETRIC)
from horoflow.geometry import surface, support_functions, mean_curvature, cap_shape

logger = logging.getLogger(__name__)

barrier_slack = 1e-6

# Flow State ---------------------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FlowState:
    grid      : object
    u         : Field
    t         : float = 0.0
    cos_theta : float = 0.0

    def __post_init__(self):
        if self.u.grid != self.grid:
            raise ValueError("Field grid does not match state grid")
        object.__setattr__(self, "cos_theta", check_cos_theta(self.cos_theta))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self):
        return self.grid.n

    @property
    def theta(self):
        return math.acos(self.cos_theta)

    @property
    def rho(self):
        return np.exp(self.u.values)

    def evolve(self, values, t):
        return replace(self, u=Field(self.grid, values), t=t)


@dataclass(frozen=True)
class FlowConfig:
    c_cfl        : float = 0.2
    tol_steady   : float = 1e-8
    t_max        : float = 50.0
    record_every : int   = 100

    def __post_init__(self):
        if not (0 < self.c_cfl < 1):
            raise ValueError("c_cfl must lie in (0, 1), got {!r}".format(self.c_cfl))
        if not (self.tol_steady > 0):
            raise ValueError("tol_steady must be positive, got {!r}".format(self.tol_steady))
        if self.t_max < 0:
            raise ValueError("t_max must be non-negative, got {!r}".format(self.t_max))
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer, got {!r}".format(
                self.record_every))


@dataclass(frozen=True)
class StepReport:
    dt        : float
    sup_g     : float
    rho_min   : float
    min_gXnu  : float
    outside   : int = 0 # Nodes outside the barrier caps (0 when no barriers are monitored).


@dataclass(frozen=True)
class BarrierReport:
    t       : float
    inside  : np.ndarray
    r_max   : float
    r_min   : float

    @property
    def all_inside(self):
        return bool(np.all(self.inside))


class RunStatus(enum.Enum):
    CONVERGED            = "converged"
    BUDGET_EXHAUSTED     = "budget exhausted"
    STAR_SHAPEDNESS_LOST = "star-shapedness lost"


@dataclass
class FlowResult:
    state               : FlowState
    status              : RunStatus
    steps               : int   = 0
    trajectory          : list  = field(default_factory=list)
    barriers            : list  = field(default_factory=list)
    reports             : list  = field(default_factory=list)
    message             : str   = ""
    # Checked on every accepted step.
    energy_increases    : int   = 0
    max_energy_increase : float = 0.0
    barrier_outside     : int   = 0 # Node-steps outside the barrier caps.
    r_max_rise          : float = 0.0
    r_min_drop          : float = 0.0

    @property
    def converged(self):
        return self.status is RunStatus.CONVERGED

# Right-Hand Side ----------------------------------------------------------------------------------

def scalar_speed(p, cos_theta):
    """G at every node of a surface bundle."""
    n = p.n
    return (p.x*p.elliptic_part()/(p.rho*p.v)
        + n*p.grad_sq/(p.rho*p.v)
        + n*p.sin_beta*p.d_beta/p.v
        - n*cos_theta/p.rho*(p.rho + p.cos_beta + p.sin_beta*p.d_beta))


def normal_speed(p, cos_theta):
    """f = n/x_{n+1} − n cosθ ḡ(x,ν) − H ḡ(X_{n+1},ν) at every node of a surface bundle."""
    s = support_functions(p)
    n = p.n
    return n*p.e_omega - n*cos_theta*s.gxnu - mean_curvature(p)*s.gXnu


def _surface(state):
    try:
        return surface(state.u, state.cos_theta)
    except ValueError as e:
        raise StarShapednessLost(str(e), state)


def evaluate(state):
    p = _surface(state)
    g = scalar_speed(p, state.cos_theta)
    if not np.all(np.isfinite(g)):
        raise StarShapednessLost("Non-finite flow speed at t = {:g}".format(state.t), state)
    return p, g


def rhs_G(state):
    """G at every node."""
    return Field(state.grid, evaluate(state)[1])


def speed_f(state):
    """Normal speed f of the flow at every node."""
    return Field(state.grid, normal_speed(_surface(state), state.cos_theta))

# Volume Constraint --------------------------------------------------------------------------------

def volume_weight(p):
    """ḡ(X_{n+1},ν) dA/dσ = (ρ e^ω)^{n+1}: the volume rate of a unit change of u."""
    return (p.rho*p.e_omega)**(p.n + 1)


def volume_multiplier(grid, p, g):
    """μ with ∫ (G − μ) ḡ(X_{n+1},ν) dA = 0, i.e. μ = ∫ f dA / ∫ ḡ(X_{n+1},ν) dA."""
    w = volume_weight(p)
    return float(integrate_values(grid, w*g)/integrate_values(grid, w))


def evaluate_velocity(state):
    """Surface bundle and u_t = G − μ of the volume-preserving scheme."""
    p, g = evaluate(state)
    return p, g - volume_multiplier(state.grid, p, g)


def flow_velocity(state):
    """∂_t u of the scheme at every node."""
    return Field(state.grid, evaluate_velocity(state)[1])

# Time Stepping ------------------------------------------------------------------------------------

def _effective_spacing(grid):
    if grid.axisymmetric:
        return grid.h_beta
    return min(grid.h_beta, math.sin(grid.h_beta)*grid.h_xi)


def parabolic_coefficient(state, p=None):
    """x_{n+1}/(ρv): scale of the leading-order coefficients of G."""
    if p is None:
        p = _surface(state)
    return p.x/(p.rho*p.v)


def cfl_dt(state, c_cfl=0.2, p=None):
    h = _effective_spacing(state.grid)
    return c_cfl*h*h/float(np.max(parabolic_coefficient(state, p)))


def _average_pole(grid, values):
    if not grid.axisymmetric:
        values[0] = np.mean(values[0])
    return values


def _advance(state, dt, g1=None, t=None):
    grid = state.grid
    t    = state.t + dt if t is None else t
    if g1 is None:
        g1 = evaluate_velocity(state)[1]
    stage = _average_pole(grid, state.u.values + dt*g1)
    g2 = evaluate_velocity(state.evolve(stage, t))[1]
    values = _average_pole(grid, state.u.values + 0.5*dt*(g1 + g2))
    if not np.all(np.isfinite(values)):
        raise StarShapednessLost("Non-finite radial function after step", state)
    return state.evolve(values, t)


def step(state, dt):
    """One Heun (RK2) step of the volume-preserving scheme."""
    return _advance(state, dt)

# Diagnostics --------------------------------------------------------------------------------------

def cap_radii(state):
    """Radius ρ/P(β) of the cap C_{θ,r} through each node."""
    return state.rho/cap_shape(state.cos_theta, state.grid.beta_nodes)


def barrier_monitor(state, r_inner, r_outer, slack=barrier_slack):
    """
    Position of the graph relative to the caps C_{θ,r_inner} and C_{θ,r_outer}.

    The caps form the family ρ = r·P(β), so each node lies on the cap of radius ρ/P(β).
    """
    if not (r_outer > r_inner > 0):
        raise ValueError("Barrier radii must satisfy r_outer > r_inner > 0")
    radius = cap_radii(state)
    inside = (radius >= r_inner*(1 - slack)) & (radius <= r_outer*(1 + slack))
    return BarrierReport(
        t      = state.t,
        inside = inside,
        r_max  = float(np.max(radius)),
        r_min  = float(np.min(radius)))


def axisymmetrize(state):
    """ξ-averaged axisymmetric copy of a full2d state."""
    if state.grid.axisymmetric:
        return state
    grid = build_grid(state.n, AXISYMMETRIC, state.grid.n_beta)
    return FlowState(grid, Field(grid, np.mean(state.u.values, axis=1)), state.t, state.cos_theta)


def _step_report(p, g, dt, barrier=None):
    s = support_functions(p)
    outside = 0
    if barrier is not None:
        outside = int(np.count_nonzero(~barrier.inside))
    return StepReport(
        dt       = dt,
        sup_g    = float(np.max(np.abs(g))),
        rho_min  = float(np.min(p.rho)),
        min_gXnu = float(np.min(s.gXnu)),
        outside  = outside)

# Steppers -----------------------------------------------------------------------------------------

def _monitor_step(monitor, state, p, barriers):
    from horoflow.functionals import energy

    radius = cap_radii(state)
    outside = 0
    if barriers is not None:
        outside = int(np.count_nonzero(~barrier_monitor(state, *barriers).inside))
    kernels.monitor_update(monitor, energy(state, p), float(np.min(radius)),
        float(np.max(radius)), outside)


def _new_monitor(state, p):
    from horoflow.functionals import energy

    radius  = cap_radii(state)
    monitor = np.zeros(kernels.monitor_size)
    monitor[kernels.M_ENERGY]     = energy(state, p)
    monitor[kernels.M_R_MAX_LOW]  = np.max(radius)
    monitor[kernels.M_R_MIN_HIGH] = np.min(radius)
    return monitor


class NumpyStepper:
    """Heun steps through the surface bundle; any grid."""
    def __init__(self, state, config, barriers, monitor):
        self.state    = state
        self.config   = config
        self.barriers = barriers
        self.monitor  = monitor
        self.steps    = 0
        self.dt       = 0.0
        self.p, self.g = evaluate_velocity(state)
        self.sup      = float(np.max(np.abs(self.g)))

    def advance(self, max_steps):
        config = self.config
        for _ in range(max_steps):
            state = self.state
            if state.t >= config.t_max:
                return kernels.BUDGET
            if self.sup < config.tol_steady:
                return kernels.CONVERGED
            dt = cfl_dt(state, config.c_cfl, self.p)
            t  = state.t + dt
            if config.t_max - state.t <= dt:
                dt, t = config.t_max - state.t, config.t_max
            new = _advance(state, dt, self.g, t)
            self.p, self.g = evaluate_velocity(new)
            self.state = new
            self.sup   = float(np.max(np.abs(self.g)))
            self.dt    = dt
            self.steps += 1
            _monitor_step(self.monitor, new, self.p, self.barriers)
        return kernels.RUNNING


class KernelStepper:
    """Heun steps of axisymmetric states in compiled loops."""
    def __init__(self, state, config, barriers, monitor):
        grid = state.grid
        if not grid.axisymmetric:
            raise ValueError("Compiled stepping needs an axisymmetric grid")
        self.state    = state
        self.config   = config
        self.monitor  = monitor
        self.steps    = 0
        self.dt       = 0.0
        self.sup      = math.inf
        self.u        = state.u.values.copy()
        cot = np.zeros(grid.n_beta)
        cot[1:] = grid.cos_beta[1:]/grid.sin_beta[1:]
        r_inner, r_outer = barriers if barriers is not None else (0.0, math.inf)
        self.geometry = (grid.sin_beta, grid.cos_beta, cot, quadrature_weights(grid),
            cap_shape(state.cos_theta, grid.beta), grid.n, state.cos_theta,
            float(oblique_slope(state.cos_theta)), grid.h_beta,
            sphere_area(grid.n - 1)/grid.n, float(r_inner), float(r_outer), barrier_slack)

    def advance(self, max_steps):
        config = self.config
        (sin_beta, cos_beta, cot, weights, shape, n, cos_theta, slope, h, wet_coef, r_inner,
            r_outer, slack) = self.geometry
        status, steps, t, dt, sup = kernels.axisymmetric_advance(self.u, self.state.t,
            float(config.t_max), int(max_steps), float(config.c_cfl), float(config.tol_steady),
            sin_beta, cos_beta, cot, weights, shape, n, cos_theta, slope, h, wet_coef, r_inner,
            r_outer, slack, self.monitor)
        self.sup = sup
        if steps:
            self.state  = self.state.evolve(self.u.copy(), t)
            self.dt     = dt
            self.steps += steps
        if status == kernels.LOST:
            raise StarShapednessLost("Non-finite flow speed after t = {:g}".format(t), self.state)
        return status

# Run ----------------------------------------------------------------------------------------------

statuses = {
    kernels.CONVERGED : RunStatus.CONVERGED,
    kernels.BUDGET    : RunStatus.BUDGET_EXHAUSTED,
}


def check_contact_angle(n, cos_theta):
    if abs(cos_theta) >= convergence_threshold(n):
        logger.warning("|cos(theta)| = %.6g is outside the convergence range |cos(theta)| < %.6g "
            "for n = %d; running anyway.", abs(cos_theta), convergence_threshold(n), n)
        return False
    return True


def _collect(result, monitor):
    result.energy_increases    = int(monitor[kernels.M_INCREASES])
    result.max_energy_increase = float(monitor[kernels.M_MAX_INCREASE])
    result.barrier_outside     = int(monitor[kernels.M_OUTSIDE])
    result.r_max_rise          = float(monitor[kernels.M_R_MAX_RISE])
    result.r_min_drop          = float(monitor[kernels.M_R_MIN_DROP])


def run_to_steady(state, config=None, barriers=None, compiled=True):
    """
    Evolve until sup|u_t| < tol_steady or t >= t_max; the budget is checked first.

    barriers: optional (r_inner, r_outer) cap radii, checked on every step.
    compiled: advance axisymmetric states with the compiled kernels.
    """
    from horoflow.functionals import diagnostics

    config = config or FlowConfig()
    check_contact_angle(state.n, state.cos_theta)
    logger.info("Flow start: grid %s, cos(theta) = %g, t_max = %g.",
        state.grid.shape, state.cos_theta, config.t_max)

    result  = FlowResult(state=state, status=RunStatus.BUDGET_EXHAUSTED)
    stepper = None
    monitor = None

    def record(state, dt):
        p, g = evaluate_velocity(state)
        rec  = diagnostics(state, step=result.steps, dt=dt, sup_g=float(np.max(np.abs(g))))
        result.trajectory.append(rec)
        barrier = None
        if barriers is not None:
            barrier = barrier_monitor(state, *barriers)
            result.barriers.append(barrier)
        result.reports.append(_step_report(p, g, dt, barrier))
        logger.debug("step %d t=%.6g sup|G|=%.3e volume=%.12g energy=%.12g",
            rec.step, rec.t, rec.sup_G, rec.volume, rec.energy)

    def check_monitor(increases, outside):
        if monitor[kernels.M_INCREASES] > increases:
            logger.warning("Energy rose above the slack on %d steps before t = %g "
                "(largest rise %.3e).", int(monitor[kernels.M_INCREASES] - increases),
                result.state.t, monitor[kernels.M_MAX_INCREASE])
        if monitor[kernels.M_OUTSIDE] > outside:
            logger.warning("%d node-steps outside the barrier caps before t = %g.",
                int(monitor[kernels.M_OUTSIDE] - outside), result.state.t)

    try:
        p, _ = evaluate_velocity(state)
        monitor = _new_monitor(state, p)
        kind    = KernelStepper if compiled and state.grid.axisymmetric else NumpyStepper
        stepper = kind(state, config, barriers, monitor)
        record(state, 0.0)
        status = kernels.RUNNING
        while status == kernels.RUNNING:
            increases, outside = monitor[kernels.M_INCREASES], monitor[kernels.M_OUTSIDE]
            status = stepper.advance(config.record_every - stepper.steps % config.record_every)
            result.state = stepper.state
            result.steps = stepper.steps
            on_cadence = result.steps % config.record_every == 0
            if on_cadence and result.trajectory[-1].step != result.steps:
                record(result.state, stepper.dt)
            check_monitor(increases, outside)
        if result.trajectory[-1].step != result.steps:
            record(result.state, stepper.dt)
        result.status = statuses[status]
    except StarShapednessLost as e:
        result.status  = RunStatus.STAR_SHAPEDNESS_LOST
        result.message = str(e)
        if stepper is not None:
            result.state = stepper.state
            result.steps = stepper.steps
        logger.error("Star-shapedness lost at t = %g: %s", result.state.t, e)

    if monitor is not None:
        _collect(result, monitor)
    logger.info("Flow end: %s after %d steps, t = %g.", result.status.value, result.steps,
        result.state.t)
    return result
