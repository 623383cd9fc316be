"""Finite-volume reference solver for

    eps f_t + mu f_x + (sigma(x) / eps) L f = 0

on a slab, by first-order splitting: a flux-limited Lax-Wendroff sweep per
direction (van Leer limiter, two transparent ghost cells per side) followed
by the exact collision update ``exp(-sigma dt / eps^2 L)`` in each cell.
Incoming boundary data are imposed on the first and last cells.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .angular import AngularGrid, CollisionOperator
from .errors import InvalidArgument, InvalidTimestep

log = logging.getLogger(__name__)

DEFAULT_CFL = 0.5


@dataclass(frozen=True)
class SigmaProfile:
    """``uniform`` (sigma = 1) or ``two-zone`` (sigma = eps on [a, x_m], 1 beyond)."""

    kind: str = "uniform"
    x_m: float | None = None

    def __post_init__(self):
        if self.kind not in ("uniform", "two-zone"):
            raise InvalidArgument(f"unknown sigma profile {self.kind!r}")
        if self.kind == "two-zone" and self.x_m is None:
            raise InvalidArgument("two-zone profile needs an interface position")

    @classmethod
    def uniform(cls) -> "SigmaProfile":
        return cls("uniform")

    @classmethod
    def two_zone(cls, x_m: float) -> "SigmaProfile":
        return cls("two-zone", float(x_m))

    def values(self, x, eps: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "uniform":
            return np.ones_like(x)
        return np.where(x < self.x_m, eps, 1.0)


@dataclass(frozen=True)
class KineticGrid:
    a: float
    b: float
    n_cells: int
    angular: AngularGrid

    def __post_init__(self):
        if self.n_cells < 4 or not self.b > self.a:
            raise InvalidArgument(f"invalid kinetic grid [{self.a}, {self.b}] with {self.n_cells} cells")

    @classmethod
    def with_spacing(cls, a: float, b: float, dx: float, angular: AngularGrid) -> "KineticGrid":
        return cls(a, b, max(4, int(round((b - a) / dx))), angular)

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass
class KineticState:
    t: float
    f: np.ndarray  # (cells, directions)

    def copy(self) -> "KineticState":
        return KineticState(self.t, self.f.copy())


@dataclass(frozen=True)
class KineticData:
    """Incoming data ``phi_a(t, mu)`` (mu > 0 at x = a), ``phi_b(t, mu)`` (mu < 0 at x = b),
    and the initial state ``phi0(x, mu)``; all broadcast over NumPy arrays."""

    phi_a: Callable
    phi_b: Callable
    phi0: Callable


def courant_numbers(grid: KineticGrid, eps: float, dt: float, cfl: float = DEFAULT_CFL) -> np.ndarray:
    nu = grid.angular.nodes * dt / (eps * grid.dx)
    if np.max(np.abs(nu)) > cfl * (1 + 1e-12):
        raise InvalidTimestep(f"CFL number {np.max(np.abs(nu)):.4f} exceeds {cfl}")
    return nu


def impose_incoming(f: np.ndarray, grid: KineticGrid, left=None, right=None) -> None:
    if left is not None:
        f[0, grid.angular.positive] = left
    if right is not None:
        f[-1, grid.angular.negative] = right


def advect_step(state: KineticState, grid: KineticGrid, eps: float, dt: float, left=None, right=None,
                cfl: float = DEFAULT_CFL, backend=None) -> KineticState:
    """Transport every direction at speed ``mu / eps``, then overwrite incoming boundary values."""
    nu = courant_numbers(grid, eps, dt, cfl)
    f = np.ascontiguousarray(state.f, dtype=float).copy()
    (backend or kernels.backend).advect_sweep(f, nu)
    impose_incoming(f, grid, left, right)
    return KineticState(state.t + dt, f)


def _relaxation_blocks(grid: KineticGrid, op: CollisionOperator, eps: float, dt: float, sigma: SigmaProfile):
    rates = sigma.values(grid.centers, eps) * dt / eps**2
    blocks = []
    for rate in np.unique(rates):
        blocks.append((rates == rate, op.relaxation_matrix(rate).T.copy()))
    return blocks


def collide_step(state: KineticState, grid: KineticGrid, eps: float, dt: float, sigma: SigmaProfile,
                 op: CollisionOperator) -> KineticState:
    f = np.array(state.f, dtype=float)
    for mask, R in _relaxation_blocks(grid, op, eps, dt, sigma):
        f[mask] = f[mask] @ R
    return KineticState(state.t, f)


class KineticStepper:
    """Fixed-step driver with cached Courant numbers and relaxation matrices."""

    def __init__(self, grid: KineticGrid, op: CollisionOperator, eps: float, dt: float,
                 sigma: SigmaProfile | None = None, cfl: float = DEFAULT_CFL, backend=None):
        if op.grid.count != grid.angular.count:
            raise InvalidArgument("collision operator and kinetic grid use different angular grids")
        self.grid, self.op, self.eps, self.dt = grid, op, float(eps), float(dt)
        self.sigma = sigma or SigmaProfile.uniform()
        self.cfl = cfl
        self.backend = backend or kernels.backend
        self._nu = courant_numbers(grid, eps, dt, cfl)
        self._blocks = _relaxation_blocks(grid, op, eps, dt, self.sigma)
        self._single = len(self._blocks) == 1

    def step(self, f: np.ndarray, left=None, right=None) -> np.ndarray:
        """Advance ``f`` by one step in place; ``left``/``right`` are the incoming values at the new time."""
        self.backend.advect_sweep(f, self._nu)
        impose_incoming(f, self.grid, left, right)
        if self._single:
            np.matmul(f, self._blocks[0][1], out=f)
        else:
            for mask, R in self._blocks:
                f[mask] = f[mask] @ R
        impose_incoming(f, self.grid, left, right)
        return f


def reference_timestep(eps: float, dx: float, cfl: float = DEFAULT_CFL, cap: str = "eps2") -> float:
    dt = cfl * eps * dx
    if cap == "eps2":
        dt = min(dt, eps**2)
    elif cap != "none":
        raise InvalidArgument(f"unknown time-step cap {cap!r}")
    return dt


def pure_reference_dx(eps: float) -> float:
    return min(5e-4, eps / 25.0)


def time_levels(T: float, dt: float, save_times: Sequence[float] = ()) -> np.ndarray:
    """Uniform levels ``k dt`` up to ``T`` with ``T`` and every save time inserted exactly."""
    n = int(np.ceil(T / dt - 1e-9))
    levels = np.concatenate([np.arange(n + 1) * dt, [T], [s for s in save_times if 0 < s < T]])
    levels = np.unique(levels[levels <= T])
    keep = np.concatenate([[True], np.diff(levels) > 1e-12 * max(dt, 1.0)])
    levels = levels[keep]
    levels[-1] = T
    return levels


class StepperPool:
    """Stepper for the nominal step plus lazily built ones for shortened steps."""

    def __init__(self, factory, dt):
        self.factory, self.dt = factory, dt
        self.cache = {}
        self.main = factory(dt)

    def __call__(self, h):
        if abs(h - self.dt) <= 1e-9 * self.dt:
            return self.main
        key = round(h, 15)
        if key not in self.cache:
            self.cache[key] = self.factory(h)
        return self.cache[key]


def run_reference(
    data: KineticData,
    eps: float,
    sigma: SigmaProfile,
    T: float,
    grid: KineticGrid,
    op: CollisionOperator,
    dt: float | None = None,
    cfl: float = DEFAULT_CFL,
    save_times: Sequence[float] = (),
    backend=None,
) -> tuple[KineticState, dict[float, KineticState]]:
    """Resolved solve to ``T``; returns the final state and copies at ``save_times``."""
    if T <= 0:
        raise InvalidArgument(f"final time must be positive, got {T}")
    dt = reference_timestep(eps, grid.dx, cfl) if dt is None else dt
    mu = grid.angular.nodes
    pos, neg = grid.angular.positive, grid.angular.negative
    f = np.ascontiguousarray(data.phi0(grid.centers[:, None], mu[None, :]) * np.ones((grid.n_cells, mu.size)))
    steppers = StepperPool(lambda h: KineticStepper(grid, op, eps, h, sigma, cfl, backend), dt)
    levels = time_levels(T, dt, save_times)
    wanted = {float(s) for s in save_times}
    saved = {s: KineticState(0.0, f.copy()) for s in wanted if s <= 0.0}
    log.info("kinetic reference: eps=%g, %d cells, %d steps", eps, grid.n_cells, levels.size - 1)
    for t_prev, t_next in zip(levels[:-1], levels[1:]):
        steppers(t_next - t_prev).step(
            f, data.phi_a(t_next, mu[pos]) * np.ones(pos.sum()), data.phi_b(t_next, mu[neg]) * np.ones(neg.sum())
        )
        for s in wanted:
            if abs(s - t_next) <= 1e-12 * max(1.0, T):
                saved[s] = KineticState(float(t_next), f.copy())
    return KineticState(float(T), f), saved
