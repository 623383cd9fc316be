"""Kinetic region on the left, heat equation on the right, joined at ``x_m``.

The kinetic side sees the heat side only through a half-space Albedo map:
its outgoing values at the interface (mu > 0) are mapped to the back-flow
(mu < 0) that re-enters it, and to the interface temperature ``theta_m``
that drives the heat side. Nothing flows from the heat side back into the
kinetic side.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .angular import CollisionOperator, split_mean
from .errors import InvalidArgument
from .halfspace import AlbedoMap, HalfSpaceSystem, albedo_map
from .heat import HeatGrid, HeatState, heat_step
from .kinetic import (
    DEFAULT_CFL,
    KineticData,
    KineticGrid,
    KineticState,
    KineticStepper,
    SigmaProfile,
    StepperPool,
    time_levels,
)

log = logging.getLogger(__name__)

DEFAULT_DX = 5e-3


@dataclass
class CoupledState:
    t: float
    f: np.ndarray  # kinetic cells x directions
    theta: np.ndarray  # heat cells
    theta_m: float


@dataclass
class CoupledRun:
    final: CoupledState
    saved: dict[float, CoupledState]
    interface_times: np.ndarray
    interface_theta: np.ndarray


@dataclass
class CoupledProblem:
    """Geometry and solvers for one coupled run.

    ``kinetic`` covers ``[a, x_m]`` and ``heat`` covers ``[x_m, b]``; the
    kinetic region uses collision rate ``1 / eps`` (sigma = eps).
    """

    kinetic: KineticGrid
    heat: HeatGrid
    op: CollisionOperator
    system: HalfSpaceSystem
    cfl: float = DEFAULT_CFL
    albedo: AlbedoMap = field(init=False)

    def __post_init__(self):
        if not np.isclose(self.kinetic.b, self.heat.a):
            raise InvalidArgument(f"kinetic region ends at {self.kinetic.b} but heat region starts at {self.heat.a}")
        ang = self.kinetic.angular
        self.albedo = albedo_map(self.system, ang.nodes[ang.positive], ang.nodes[ang.negative])

    @classmethod
    def build(cls, a: float, x_m: float, b: float, op: CollisionOperator, system: HalfSpaceSystem,
              dx: float = DEFAULT_DX, cfl: float = DEFAULT_CFL) -> "CoupledProblem":
        return cls(KineticGrid.with_spacing(a, x_m, dx, op.grid), HeatGrid.with_spacing(x_m, b, dx), op, system, cfl)

    @property
    def x_m(self) -> float:
        return self.kinetic.b

    def timestep(self, eps: float) -> float:
        return self.cfl * eps * self.kinetic.dx

    def sigma(self) -> SigmaProfile:
        # every kinetic cell lies left of x_m, so the whole region gets sigma = eps
        return SigmaProfile.two_zone(self.x_m + self.kinetic.dx)


def initial_state(problem: CoupledProblem, data: KineticData) -> CoupledState:
    """Initial data on both sides plus the back-flow generated by ``phi0`` at the interface."""
    ang = problem.kinetic.angular
    mu = ang.nodes
    f = np.ascontiguousarray(data.phi0(problem.kinetic.centers[:, None], mu[None, :])
                             * np.ones((problem.kinetic.n_cells, mu.size)))
    at_interface = data.phi0(problem.x_m, mu[ang.positive]) * np.ones(ang.positive.sum())
    back, theta_m = problem.albedo(at_interface)
    f[-1, ang.negative] = back
    theta = split_mean(data.phi0, problem.heat.centers)
    return CoupledState(0.0, f, theta, float(theta_m))


def run_coupled(
    problem: CoupledProblem,
    data: KineticData,
    eps: float,
    T: float,
    dt: float | None = None,
    save_times: Sequence[float] = (),
    backend=None,
) -> CoupledRun:
    """March the coupled system to ``T``.

    Per step: kinetic update with ``phi_a`` on the left and transparent
    extrapolation on the right, Albedo map of the new interface values, then
    one heat step with ``theta_m`` on the left and the half-space end state of
    ``phi_b`` on the right.
    """
    if T <= 0:
        raise InvalidArgument(f"final time must be positive, got {T}")
    ang = problem.kinetic.angular
    mu = ang.nodes
    pos, neg = ang.positive, ang.negative
    dt = problem.timestep(eps) if dt is None else dt
    sigma = problem.sigma()
    steppers = StepperPool(lambda h: KineticStepper(problem.kinetic, problem.op, eps, h, sigma, problem.cfl, backend), dt)
    lam = problem.op.diffusion_coefficient()
    state = initial_state(problem, data)
    f, heat = state.f, HeatState(0.0, state.theta)
    levels = time_levels(T, dt, save_times)
    wanted = {float(s) for s in save_times}
    saved = {s: _snapshot(state) for s in wanted if s <= 0.0}
    interface = np.empty(levels.size)
    interface[0] = state.theta_m
    log.info("coupled run: eps=%g, %d + %d cells, %d steps", eps, problem.kinetic.n_cells,
             problem.heat.n_cells, levels.size - 1)
    for n, (t_prev, t_next) in enumerate(zip(levels[:-1], levels[1:]), start=1):
        steppers(t_next - t_prev).step(f, data.phi_a(t_next, mu[pos]) * np.ones(pos.sum()), None)
        back, theta_m = problem.albedo(f[-1, pos])
        f[-1, neg] = back
        theta_b = problem.system.reflected_end_state(lambda m: data.phi_b(t_next, m))
        heat = heat_step(heat, problem.heat, lam, t_next - t_prev, theta_m, theta_b)
        interface[n] = theta_m
        state = CoupledState(float(t_next), f, heat.theta, float(theta_m))
        for s in wanted:
            if abs(s - t_next) <= 1e-12 * max(1.0, T):
                saved[s] = _snapshot(state)
    return CoupledRun(_snapshot(state), saved, levels, interface)


def _snapshot(state: CoupledState) -> CoupledState:
    return CoupledState(state.t, state.f.copy(), np.array(state.theta), state.theta_m)


def l2_norm(f: np.ndarray, dx: float, weights: np.ndarray) -> float:
    """``(int 1/2 int f^2 dmu dx)^{1/2}`` with midpoint cells and the angular rule."""
    return float(np.sqrt(dx * np.sum((f * f) @ (0.5 * weights))))


def default_perturbation(s):
    return 1.0 / (1.0 + np.sqrt(s))


@dataclass
class StabilityRun:
    times: np.ndarray
    deviation: np.ndarray


def run_stability(
    problem: CoupledProblem,
    eps: float,
    T: float,
    perturbation: Callable[[float], float] = default_perturbation,
    dt: float | None = None,
    backend=None,
) -> StabilityRun:
    """Zero data on the kinetic region with a decaying forcing ``p(t / eps^2)`` added to the back-flow.

    Returns the L2 norm of the kinetic solution (its deviation from the
    zero steady state) after every step.
    """
    if T <= 0:
        raise InvalidArgument(f"final time must be positive, got {T}")
    ang = problem.kinetic.angular
    pos, neg = ang.positive, ang.negative
    dt = problem.timestep(eps) if dt is None else dt
    steppers = StepperPool(
        lambda h: KineticStepper(problem.kinetic, problem.op, eps, h, problem.sigma(), problem.cfl, backend), dt
    )
    f = np.zeros((problem.kinetic.n_cells, ang.count))
    f[-1, neg] = perturbation(0.0)
    levels = time_levels(T, dt)
    deviation = np.empty(levels.size)
    deviation[0] = l2_norm(f, problem.kinetic.dx, ang.weights)
    zeros = np.zeros(pos.sum())
    for n, (t_prev, t_next) in enumerate(zip(levels[:-1], levels[1:]), start=1):
        steppers(t_next - t_prev).step(f, zeros, None)
        back, _ = problem.albedo(f[-1, pos])
        f[-1, neg] = back + perturbation(t_next / eps**2)
        deviation[n] = l2_norm(f, problem.kinetic.dx, ang.weights)
    return StabilityRun(levels, deviation)
