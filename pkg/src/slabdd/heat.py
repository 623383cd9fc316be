"""Implicit cell-centered finite differences for ``theta_t = lambda theta_xx``.

The first and last cells carry the Dirichlet data directly (identity rows),
so boundary values live at cell centers ``a + dx/2`` and ``b - dx/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .errors import InvalidArgument


@dataclass(frozen=True)
class HeatGrid:
    a: float
    b: float
    n_cells: int

    def __post_init__(self):
        if self.n_cells < 3 or not self.b > self.a:
            raise InvalidArgument(f"invalid heat grid [{self.a}, {self.b}] with {self.n_cells} cells")

    @classmethod
    def with_spacing(cls, a: float, b: float, dx: float) -> "HeatGrid":
        return cls(a, b, max(3, int(round((b - a) / dx))))

    @property
    def dx(self) -> float:
        return (self.b - self.a) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.a + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class HeatState:
    t: float
    theta: np.ndarray


def heat_step(state: HeatState, grid: HeatGrid, lam: float, dt: float, theta_a: float, theta_b: float, backend=None) -> HeatState:
    """One backward-Euler step with boundary cells pinned to the data at ``t + dt``."""
    if not dt > 0 or not lam > 0:
        raise InvalidArgument(f"need dt > 0 and lambda > 0, got dt={dt}, lambda={lam}")
    solve = (backend or kernels.backend).thomas_solve
    n = grid.n_cells
    r = lam * dt / grid.dx**2
    lower = np.full(n, -r)
    upper = np.full(n, -r)
    diag = np.full(n, 1.0 + 2.0 * r)
    lower[0] = upper[0] = lower[-1] = upper[-1] = 0.0
    diag[0] = diag[-1] = 1.0
    rhs = np.array(state.theta, dtype=float)
    rhs[0], rhs[-1] = theta_a, theta_b
    return HeatState(state.t + dt, solve(lower, diag, upper, rhs))


@dataclass(frozen=True)
class HeatProblem:
    grid: HeatGrid
    lam: float


def run_heat(
    problem: HeatProblem,
    theta_a: Callable[[float], float],
    theta_b: Callable[[float], float],
    theta0: Callable[[np.ndarray], np.ndarray],
    T: float,
    dt: float,
    save_times: Sequence[float] = (),
) -> tuple[HeatState, dict[float, HeatState]]:
    """March to ``T``; returns the final state and states at ``save_times``.

    Initial values are ``theta0`` at every center, boundary cells included; the
    boundary data first act at ``t = dt``. Steps are shortened where needed to
    land on ``T`` and on every save time exactly.
    """
    from .kinetic import time_levels

    grid = problem.grid
    state = HeatState(0.0, np.asarray(theta0(grid.centers), dtype=float) * np.ones(grid.n_cells))
    wanted = {float(s) for s in save_times}
    saved = {s: state for s in wanted if s <= 0.0}
    levels = time_levels(T, dt, save_times)
    for t_prev, t_next in zip(levels[:-1], levels[1:]):
        state = heat_step(state, grid, problem.lam, t_next - t_prev, theta_a(t_next), theta_b(t_next))
        state = replace(state, t=float(t_next))
        for s in wanted:
            if abs(s - t_next) <= 1e-12 * max(1.0, T):
                saved[s] = state
    return state, saved
