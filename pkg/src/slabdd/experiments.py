"""Benchmark cases, error metrics and convergence suites.

Each case provides kinetic data ``phi_a``, ``phi_b``, ``phi0`` and the heat
data they induce. Some data involve the end state ``eta`` of the half-space
problem with incoming data ``mu``; cases take it as an argument so it is
resolved only when a run needs it.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .angular import CollisionOperator, build_angular_grid, build_collision_operator, make_kernel, split_mean
from .coupled import CoupledProblem, StabilityRun, run_coupled, run_stability
from .errors import InvalidArgument
from .halfspace import DEFAULT_ALPHA, DEFAULT_N, HalfSpaceSystem, build_halfspace_system, cached_system
from .heat import HeatGrid, HeatProblem, run_heat
from .kinetic import (
    DEFAULT_CFL,
    KineticData,
    KineticGrid,
    KineticState,
    SigmaProfile,
    pure_reference_dx,
    reference_timestep,
    run_reference,
)

log = logging.getLogger(__name__)

PURE_CASES = ("pure1", "pure2", "pure3", "pure4", "pure5", "pure6")
COUPLED_CASES = ("coupled1", "coupled2", "coupled3")
CASES = PURE_CASES + COUPLED_CASES + ("stability",)
PURE_INNER = (-0.9, 0.9)
METRICS = ("E_theta", "E_f", "E_theta_inner", "E_f_inner")


@dataclass(frozen=True)
class CaseSpec:
    """One benchmark configuration.

    The data callables take ``eta`` as their last argument. ``theta_a`` and
    ``theta_b`` are the closed-form heat boundary data (``None`` where the
    left boundary is the coupling interface); runs recompute them from the
    half-space solver, and tests compare the two.
    """

    id: str
    kind: str  # "pure", "coupled" or "stability"
    T: float
    phi_a: Callable
    phi_b: Callable
    phi0: Callable
    theta_a: Callable | None
    theta_b: Callable | None
    theta_i: Callable
    a: float = -1.0
    b: float = 1.0
    x_m: float | None = None

    def kinetic_data(self, eta: float) -> KineticData:
        return KineticData(
            lambda t, mu: self.phi_a(t, mu, eta),
            lambda t, mu: self.phi_b(t, mu, eta),
            lambda x, mu: self.phi0(x, mu, eta),
        )

    def sigma(self) -> SigmaProfile:
        return SigmaProfile.uniform() if self.x_m is None else SigmaProfile.two_zone(self.x_m)


def _zero(*args):
    return 0.0


def make_case(case_id: str) -> CaseSpec:
    A = np.abs
    sin, cos, pi = np.sin, np.cos, np.pi
    table = {
        "pure1": dict(
            phi_a=_zero, phi_b=_zero,
            phi0=lambda x, mu, eta: sin(pi * x) + 0 * mu,
            theta_a=_zero, theta_b=_zero, theta_i=lambda x, eta: sin(pi * x),
        ),
        "pure2": dict(
            phi_a=_zero, phi_b=_zero,
            phi0=lambda x, mu, eta: sin(pi * x) * (1 + 0.5 * A(mu)),
            theta_a=_zero, theta_b=_zero, theta_i=lambda x, eta: 1.25 * sin(pi * x),
        ),
        "pure3": dict(
            phi_a=lambda t, mu, eta: 1.5 + 100 * t * A(mu),
            phi_b=lambda t, mu, eta: 1.5 + 100 * t * A(mu),
            phi0=lambda x, mu, eta: sin(pi * x) + 1.5 + 0 * mu,
            theta_a=lambda t, eta: 1.5 + 100 * t * eta,
            theta_b=lambda t, eta: 1.5 + 100 * t * eta,
            theta_i=lambda x, eta: sin(pi * x) + 1.5,
        ),
        "pure4": dict(
            phi_a=lambda t, mu, eta: A(mu) * (1 + 100 * t),
            phi_b=lambda t, mu, eta: A(mu) * (1 + 100 * t),
            phi0=lambda x, mu, eta: eta * A(mu) + eta / 2 + 0 * x,
            theta_a=lambda t, eta: eta * (1 + 100 * t),
            theta_b=lambda t, eta: eta * (1 + 100 * t),
            theta_i=lambda x, eta: eta + 0 * x,
        ),
        "pure5": dict(
            phi_a=lambda t, mu, eta: 1.0 + 0 * mu,
            phi_b=lambda t, mu, eta: 1.0 + 0 * mu,
            phi0=lambda x, mu, eta: 0 * x * mu,
            theta_a=lambda t, eta: 1.0, theta_b=lambda t, eta: 1.0,
            theta_i=lambda x, eta: 0 * x,
        ),
        "pure6": dict(
            phi_a=lambda t, mu, eta: A(mu),
            phi_b=lambda t, mu, eta: A(mu),
            phi0=lambda x, mu, eta: A(mu) + 0 * x,
            theta_a=lambda t, eta: eta, theta_b=lambda t, eta: eta,
            theta_i=lambda x, eta: 0.5 + 0 * x,
        ),
        "coupled1": dict(
            phi_a=_zero, phi_b=_zero,
            phi0=lambda x, mu, eta: A(mu) * sin(pi * x),
            theta_a=None, theta_b=_zero, theta_i=lambda x, eta: 0.5 * sin(pi * x),
        ),
        "coupled2": dict(
            phi_a=lambda t, mu, eta: A(mu) * t + 1,
            phi_b=lambda t, mu, eta: A(mu) * t + 0.5,
            phi0=lambda x, mu, eta: 0.25 * cos(pi * x) + 0.75 + 0 * mu,
            theta_a=None, theta_b=lambda t, eta: eta * t + 0.5,
            theta_i=lambda x, eta: 0.25 * cos(pi * x) + 0.75,
        ),
        "coupled3": dict(
            phi_a=lambda t, mu, eta: A(mu) * (t + 1),
            phi_b=lambda t, mu, eta: A(mu) * (t + 1),
            phi0=lambda x, mu, eta: A(mu) + 0 * x,
            theta_a=None, theta_b=lambda t, eta: eta * (t + 1),
            theta_i=lambda x, eta: 0.5 + 0 * x,
        ),
        "stability": dict(
            phi_a=_zero, phi_b=_zero, phi0=lambda x, mu, eta: 0 * x * mu,
            theta_a=None, theta_b=None, theta_i=lambda x, eta: 0 * x,
        ),
    }
    if case_id not in table:
        raise InvalidArgument(f"unknown case {case_id!r}; expected one of {', '.join(CASES)}")
    if case_id.startswith("pure"):
        return CaseSpec(case_id, "pure", 0.03, **table[case_id])
    if case_id == "stability":
        return CaseSpec(case_id, "stability", 0.1, x_m=0.0, **table[case_id])
    T = 0.1 if case_id == "coupled1" else 0.5
    return CaseSpec(case_id, "coupled", T, x_m=0.0, **table[case_id])


@dataclass(frozen=True)
class SolverParams:
    """Discretization parameters; ``None`` grid spacings select the case defaults."""

    kernel: str = "anisotropic"
    kernel_coeffs: tuple[float, ...] | None = None
    n_mu: int = 32
    halfspace_N: int = DEFAULT_N
    halfspace_alpha: float = DEFAULT_ALPHA
    halfspace_quadrature: int | None = None
    heat_dx: float = 1e-3
    heat_dt: float = 2.5e-4
    kinetic_dx: float | None = None
    kinetic_cfl: float = DEFAULT_CFL
    kinetic_dt_cap: str = "eps2"
    coupled_x_m: float = 0.0
    coupled_dx: float = 5e-3
    coupled_cfl: float = DEFAULT_CFL


@dataclass
class Solvers:
    """Objects shared by every run with the same parameters."""

    params: SolverParams
    op: CollisionOperator = field(init=False)
    system: HalfSpaceSystem = field(init=False)

    def __post_init__(self):
        p = self.params
        self.op = build_collision_operator(make_kernel(p.kernel, p.kernel_coeffs), build_angular_grid(p.n_mu))
        if p.halfspace_quadrature is None:
            self.system = cached_system(self.op, p.halfspace_N, p.halfspace_alpha)
        else:
            self.system = build_halfspace_system(self.op, p.halfspace_N, p.halfspace_alpha, p.halfspace_quadrature)

    @property
    def eta(self) -> float:
        return self.system.end_state(lambda mu: mu)

    @property
    def lam(self) -> float:
        return self.op.diffusion_coefficient()


@dataclass(frozen=True)
class ErrorEntry:
    case: str
    eps: float
    E_theta: float
    E_f: float
    E_theta_inner: float
    E_f_inner: float

    def metric(self, name: str) -> float:
        return getattr(self, name)


@dataclass(frozen=True)
class Profile:
    x: np.ndarray
    theta: np.ndarray
    mean_f: np.ndarray


@dataclass
class ErrorReport:
    rows: list[ErrorEntry]
    profiles: dict[tuple[str, float], Profile] = field(default_factory=dict)
    grids: dict[tuple[str, float], dict] = field(default_factory=dict)

    def series(self, case: str, metric: str = "E_theta") -> tuple[np.ndarray, np.ndarray]:
        rows = sorted((r for r in self.rows if r.case == case), key=lambda r: -r.eps)
        return np.array([r.eps for r in rows]), np.array([r.metric(metric) for r in rows])

    def slopes(self) -> dict[tuple[str, str], tuple[float, float]]:
        out = {}
        for case in sorted({r.case for r in self.rows}):
            eps, _ = self.series(case)
            if eps.size < 2:
                continue
            for m in METRICS:
                out[(case, m)] = convergence_slope(*self.series(case, m))
        return out

    def merge(self, other: "ErrorReport") -> "ErrorReport":
        rows = sorted(self.rows + other.rows, key=lambda r: (r.case, -r.eps))
        return ErrorReport(rows, {**self.profiles, **other.profiles}, {**self.grids, **other.grids})


def error_norms(
    reference: KineticState,
    ref_grid: KineticGrid,
    theta: np.ndarray,
    x: np.ndarray,
    dx: float,
    t: float,
    inner: tuple[float, float] | None = PURE_INNER,
    case: str = "",
    eps: float = float("nan"),
) -> ErrorEntry:
    """L2 distances between a scalar field ``theta`` on centers ``x`` and a kinetic reference.

    The reference is interpolated linearly onto ``x``; norms use the midpoint
    rule in ``x`` and ``w_j / 2`` in ``mu``, so ``E_theta <= E_f`` holds
    exactly. Inner variants keep cells whose centers lie in ``inner``.
    """
    if abs(reference.t - t) > 1e-12 * max(1.0, abs(t)):
        raise InvalidArgument(f"reference is at t={reference.t} but the solution is at t={t}")
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.shape != x.shape:
        raise InvalidArgument("theta and x must have the same shape")
    xr = ref_grid.centers
    f = np.stack([np.interp(x, xr, reference.f[:, j]) for j in range(reference.f.shape[1])], axis=1)
    w = 0.5 * ref_grid.angular.weights
    mean_f = f @ w
    d_theta = (theta - mean_f) ** 2
    d_f = ((theta[:, None] - f) ** 2) @ w
    mask = np.ones(x.size, bool) if inner is None else (x >= inner[0]) & (x <= inner[1])
    return ErrorEntry(
        case, eps,
        float(np.sqrt(dx * d_theta.sum())), float(np.sqrt(dx * d_f.sum())),
        float(np.sqrt(dx * d_theta[mask].sum())), float(np.sqrt(dx * d_f[mask].sum())),
    )


def convergence_slope(eps: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Least-squares ``log E = slope log eps + intercept``."""
    eps = np.asarray(eps, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if eps.size < 2 or eps.shape != errors.shape:
        raise InvalidArgument("need at least two matching (eps, error) pairs")
    if np.any(eps <= 0) or np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        raise InvalidArgument("convergence slope needs positive, finite values")
    slope, intercept = np.polyfit(np.log(eps), np.log(errors), 1)
    return float(slope), float(intercept)


def _mean_profile(state: KineticState, grid: KineticGrid) -> np.ndarray:
    return state.f @ (0.5 * grid.angular.weights)


def run_pure_case(case: CaseSpec, eps: float, solvers: Solvers, refine: int = 1, backend=None) -> tuple[ErrorEntry, Profile, dict]:
    """Resolved kinetic solve against the heat equation with half-space boundary data."""
    p = solvers.params
    eta = solvers.eta
    data = case.kinetic_data(eta)
    dx = (p.kinetic_dx or pure_reference_dx(eps)) / refine
    grid = KineticGrid.with_spacing(case.a, case.b, dx, solvers.op.grid)
    dt = reference_timestep(eps, grid.dx, p.kinetic_cfl, p.kinetic_dt_cap)
    t0 = time.perf_counter()
    ref, _ = run_reference(data, eps, case.sigma(), case.T, grid, solvers.op, dt, p.kinetic_cfl, backend=backend)
    hgrid = HeatGrid.with_spacing(case.a, case.b, p.heat_dx)
    system = solvers.system
    heat, _ = run_heat(
        HeatProblem(hgrid, solvers.lam),
        lambda t: system.end_state(lambda mu: data.phi_a(t, mu)),
        lambda t: system.reflected_end_state(lambda mu: data.phi_b(t, mu)),
        lambda x: split_mean(data.phi0, x),
        case.T,
        p.heat_dt,
    )
    entry = error_norms(ref, grid, heat.theta, hgrid.centers, hgrid.dx, heat.t, PURE_INNER, case.id, eps)
    log.info("%s eps=%g: E_theta=%.4e (%.1fs)", case.id, eps, entry.E_theta, time.perf_counter() - t0)
    profile = Profile(hgrid.centers, heat.theta, np.interp(hgrid.centers, grid.centers, _mean_profile(ref, grid)))
    return entry, profile, {"kinetic_dx": grid.dx, "kinetic_dt": dt, "heat_dx": hgrid.dx, "heat_dt": p.heat_dt}


def run_pure_suite(case_ids: Iterable[str], eps_list: Iterable[float], params: SolverParams | None = None,
                   backend=None) -> ErrorReport:
    solvers = Solvers(params or SolverParams())
    report = ErrorReport([])
    for cid in sorted(case_ids):
        case = make_case(cid)
        if case.kind != "pure":
            raise InvalidArgument(f"{cid} is not a pure-diffusion case")
        for eps in sorted(eps_list, reverse=True):
            entry, profile, grids = run_pure_case(case, eps, solvers, backend=backend)
            report.rows.append(entry)
            report.profiles[(cid, eps)] = profile
            report.grids[(cid, eps)] = grids
    return report


def coupled_problem(case: CaseSpec, solvers: Solvers) -> CoupledProblem:
    p = solvers.params
    return CoupledProblem.build(case.a, p.coupled_x_m, case.b, solvers.op, solvers.system, p.coupled_dx, p.coupled_cfl)


def coupled_reference(case: CaseSpec, eps: float, solvers: Solvers, save_times: Sequence[float] = (), backend=None):
    """Whole-domain kinetic solve with sigma = eps left of the interface."""
    p = solvers.params
    grid = KineticGrid.with_spacing(case.a, case.b, p.coupled_dx, solvers.op.grid)
    dt = reference_timestep(eps, grid.dx, p.coupled_cfl, "eps2")
    sigma = SigmaProfile.two_zone(p.coupled_x_m)
    final, saved = run_reference(case.kinetic_data(solvers.eta), eps, sigma, case.T, grid, solvers.op, dt,
                                 p.coupled_cfl, save_times, backend)
    return grid, final, saved


@dataclass
class CoupledResult:
    entry: ErrorEntry
    profile: Profile
    interface_times: np.ndarray
    interface_theta: np.ndarray
    history: dict[float, float]  # E_theta at save times


def run_coupled_case(case: CaseSpec, eps: float, solvers: Solvers, save_times: Sequence[float] = (),
                     backend=None) -> CoupledResult:
    """Coupled approximation against the whole-domain reference, compared on the heat region."""
    problem = coupled_problem(case, solvers)
    data = case.kinetic_data(solvers.eta)
    t0 = time.perf_counter()
    run = run_coupled(problem, data, eps, case.T, save_times=save_times, backend=backend)
    grid, ref, ref_saved = coupled_reference(case, eps, solvers, save_times, backend)
    xh = problem.heat.centers
    inner = (problem.x_m + 0.1, case.b - 0.1)

    def compare(ref_state, state):
        return error_norms(ref_state, grid, state.theta, xh, problem.heat.dx, state.t, inner, case.id, eps)

    entry = compare(ref, run.final)
    history = {s: compare(ref_saved[s], run.saved[s]).E_theta for s in save_times}
    x = np.concatenate([problem.kinetic.centers, xh])
    theta = np.concatenate([run.final.f @ (0.5 * problem.kinetic.angular.weights), run.final.theta])
    profile = Profile(x, theta, np.interp(x, grid.centers, _mean_profile(ref, grid)))
    log.info("%s eps=%g: E_theta=%.4e (%.1fs)", case.id, eps, entry.E_theta, time.perf_counter() - t0)
    return CoupledResult(entry, profile, run.interface_times, run.interface_theta, history)


def run_coupled_suite(case_ids: Iterable[str], eps_list: Iterable[float], params: SolverParams | None = None,
                      backend=None) -> tuple[ErrorReport, dict[tuple[str, float], CoupledResult]]:
    solvers = Solvers(params or SolverParams())
    report = ErrorReport([])
    results = {}
    for cid in sorted(case_ids):
        case = make_case(cid)
        if case.kind != "coupled":
            raise InvalidArgument(f"{cid} is not a coupled case")
        for eps in sorted(eps_list, reverse=True):
            res = run_coupled_case(case, eps, solvers, backend=backend)
            results[(cid, eps)] = res
            report.rows.append(res.entry)
            report.profiles[(cid, eps)] = res.profile
    return report, results


def run_stability_suite(eps_list: Iterable[float], params: SolverParams | None = None, T: float = 0.1,
                        backend=None) -> dict[float, StabilityRun]:
    solvers = Solvers(params or SolverParams())
    case = make_case("stability")
    problem = coupled_problem(case, solvers)
    return {eps: run_stability(problem, eps, T, backend=backend) for eps in sorted(eps_list, reverse=True)}
