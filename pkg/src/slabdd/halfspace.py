"""Spectral solver for the stationary half-space (Milne) problem

    mu d/dy f + L f = 0,   f(0, mu) = f0(mu) for mu > 0,   f -> theta_inf.

The damped problem (non-decaying modes removed by a rank-two penalty with
strength ``alpha``) is discretized with even/odd extensions of the
orthonormal Legendre polynomials on [0, 1]: N even modes and N+1 odd modes.
Galerkin testing gives ``A c' = B c`` with ``A`` symmetric positive definite,
and the boundary state ``c(0)`` is fixed by N incoming-data conditions and
N+1 conditions removing every mode of the pencil ``lambda A v = B^T v`` with
``lambda >= 0``. The undamped solution is recovered as
``f = f~ - theta_inf (g0~ - 1)`` where ``g0~`` is the damped solution for
incoming data 1.

Coefficient vectors are ordered ``c = (c_odd[0..N], c_even[0..N-1])``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import linalg
from scipy.interpolate import CubicSpline

from .angular import CollisionOperator, normalized_legendre
from .errors import DegenerateSystem, IllPosedDiscretization, InvalidArgument, InvalidKernel

DEFAULT_N = 16
DEFAULT_ALPHA = 0.1
TOL_ZERO = 1e-9
MAX_CONDITION = 1e13


def half_range_gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = npleg.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def half_range_basis(mu, n_modes: int) -> np.ndarray:
    """Orthonormal Legendre polynomials on [0, 1]; column m holds phi_{m+1}."""
    return normalized_legendre(2.0 * np.asarray(mu, dtype=float) - 1.0, n_modes - 1)


def default_quadrature(N: int) -> int:
    return max(2 * N + 8, 32)


@dataclass(frozen=True, eq=False)
class HalfSpaceSystem:
    op: CollisionOperator
    N: int
    alpha: float
    nodes: np.ndarray  # Gauss nodes on (0, 1)
    weights: np.ndarray
    A: np.ndarray
    B: np.ndarray
    eigenvalues: np.ndarray
    constraint: np.ndarray
    condition: float
    _lu: tuple
    _rhs_op: np.ndarray  # N x Nq: samples on nodes -> incoming right-hand sides
    flux_covector: np.ndarray  # <mu, f~(0)> = flux_covector . c
    c_g0: np.ndarray
    flux_g0: float

    @property
    def counts(self) -> tuple[int, int, int]:
        return classify(self.eigenvalues)

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    def boundary_map(self) -> np.ndarray:
        """Linear map from incoming samples on ``nodes`` to ``c(0)``."""
        rhs = np.zeros((self.size, self.nodes.size))
        rhs[: self.N] = self._rhs_op
        return linalg.lu_solve(self._lu, rhs)

    def trace_operator(self, mu) -> np.ndarray:
        """Rows evaluate the damped distribution at ``mu`` (either sign) from ``c``."""
        mu = np.atleast_1d(np.asarray(mu, dtype=float))
        P = half_range_basis(np.abs(mu), self.N + 1)
        sign = np.where(mu < 0, -1.0, 1.0)[:, None]
        return np.hstack([sign * P, P[:, : self.N]])

    def samples(self, f0) -> np.ndarray:
        if callable(f0):
            return np.asarray(f0(self.nodes), dtype=float) * np.ones(self.nodes.size)
        f0 = np.asarray(f0, dtype=float)
        if f0.shape != self.nodes.shape:
            raise InvalidArgument(f"expected {self.nodes.size} incoming samples, got shape {f0.shape}")
        return f0

    @property
    def theta_covector(self) -> np.ndarray:
        """``w`` with ``theta_inf = w . f0(nodes)``."""
        return self.flux_covector @ self.boundary_map() / self.flux_g0

    def end_state(self, f0) -> float:
        return float(self.theta_covector @ self.samples(f0))

    def reflected_end_state(self, fb) -> float:
        """End state for the layer at a right boundary, incoming data ``fb`` on mu < 0."""
        return float(self.theta_covector @ (np.asarray(fb(-self.nodes), dtype=float) * np.ones(self.nodes.size)))


def classify(eigenvalues, tol_zero: float = TOL_ZERO) -> tuple[int, int, int]:
    lam = np.real(eigenvalues)
    tol = tol_zero * np.max(np.abs(lam))
    return int(np.sum(lam > tol)), int(np.sum(np.abs(lam) <= tol)), int(np.sum(lam < -tol))


def _galerkin_blocks(op: CollisionOperator, N: int, alpha: float, u, w):
    kernel = op.kernel
    Kpp = kernel(u[:, None], u[None, :])
    Kpm = kernel(u[:, None], -u[None, :])
    if np.max(np.abs(Kpp - kernel(-u[:, None], -u[None, :]))) > 1e-13:
        raise InvalidKernel(f"kernel {kernel.name!r} does not commute with mu -> -mu")
    P = half_range_basis(u, N + 1)
    Pw = P * w[:, None]
    gram = Pw.T @ P
    even = gram - Pw.T @ (Kpp + Kpm) @ Pw
    odd = gram - Pw.T @ (Kpp - Kpm) @ Pw

    m = Pw.T @ u  # int_0^1 mu phi_i
    h = op.evaluate_series(op.inverse_mu_coefficients(), u)  # L^{-1} mu on (0, 1)
    q = Pw.T @ (u * h)  # <mu L^{-1} mu, phi^E_i>
    odd = odd + alpha * np.outer(m, m)
    even = even + alpha * np.outer(q, q)
    # B^E: N+1 even tests x N even trials; B^O: N odd tests x N+1 odd trials
    return gram, even[:, :N], odd[:N, :], m


def build_halfspace_system(
    op: CollisionOperator, N: int = DEFAULT_N, alpha: float = DEFAULT_ALPHA, quadrature: int | None = None
) -> HalfSpaceSystem:
    if N < 2:
        raise InvalidArgument(f"half-space order must be at least 2, got {N}")
    if not 0 < alpha < 1:
        raise InvalidArgument(f"damping must lie in (0, 1), got {alpha}")
    nq = default_quadrature(N) if quadrature is None else int(quadrature)
    if nq < N + 2:
        raise InvalidArgument(f"quadrature with {nq} nodes is too coarse for order {N}")
    u, w = half_range_gauss(nq)

    P = half_range_basis(u, N + 1)
    A_mu = (P * (2.0 * w * u)[:, None]).T @ P
    gram, BE, BO, m = _galerkin_blocks(op, N, alpha, u, w)

    n = 2 * N + 1
    A = np.zeros((n, n))
    A[: N + 1, : N + 1] = A_mu
    A[N + 1 :, N + 1 :] = A_mu[:N, :N]
    B = np.zeros((n, n))
    B[: N + 1, N + 1 :] = -2.0 * BE
    B[N + 1 :, : N + 1] = -2.0 * BO

    C = linalg.cholesky(A, lower=True)
    S = linalg.solve_triangular(C, linalg.solve_triangular(C, B.T, lower=True).T, lower=True).T
    eigenvalues = linalg.eigvals(S)
    order = np.argsort(-eigenvalues.real)
    eigenvalues = eigenvalues[order]
    counts = classify(eigenvalues)
    if counts != (N, 1, N):
        raise DegenerateSystem(
            f"expected (N, 1, N) = ({N}, 1, {N}) eigenvalues, got {counts}; spectrum {np.round(eigenvalues.real, 6)}"
        )

    tol = TOL_ZERO * np.max(np.abs(eigenvalues.real))
    _, Z, sdim = linalg.schur(S, output="real", sort=lambda re, im: re > -tol)
    if sdim != N + 1:
        raise DegenerateSystem(f"Schur reordering isolated {sdim} nonnegative modes, expected {N + 1}")

    constraint = np.zeros((n, n))
    constraint[:N, : N + 1] = A_mu[:N, :]
    constraint[:N, N + 1 :] = A_mu[:N, :N]
    # v^T A c with v = C^{-T} z equals z^T C^T c
    constraint[N:, :] = Z[:, : N + 1].T @ C.T
    cond = float(np.linalg.cond(constraint))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise IllPosedDiscretization(f"constraint matrix is singular to working precision (cond = {cond:.3e})")
    lu = linalg.lu_factor(constraint)

    rhs_op = (P[:, :N] * (2.0 * w * u)[:, None]).T
    rhs = np.zeros(n)
    rhs[:N] = rhs_op.sum(axis=1)
    c_g0 = linalg.lu_solve(lu, rhs)
    flux = np.concatenate([m, np.zeros(N)])
    flux_g0 = float(flux @ c_g0)
    if abs(flux_g0) < 1e-12:
        raise IllPosedDiscretization(f"<mu, g0(0)> = {flux_g0:.3e} vanishes; recovery is undefined")

    for a in (u, w, A, B, eigenvalues, constraint, rhs_op, flux, c_g0):
        a.setflags(write=False)
    return HalfSpaceSystem(op, N, float(alpha), u, w, A, B, eigenvalues, constraint, cond, lu, rhs_op, flux, c_g0, flux_g0)


@lru_cache(maxsize=32)
def cached_system(op: CollisionOperator, N: int = DEFAULT_N, alpha: float = DEFAULT_ALPHA) -> HalfSpaceSystem:
    return build_halfspace_system(op, N, alpha)


def solve_damped(system: HalfSpaceSystem, f0) -> np.ndarray:
    """Boundary coefficients ``c(0)`` of the damped problem."""
    rhs = np.zeros(system.size)
    rhs[: system.N] = system._rhs_op @ system.samples(f0)
    return linalg.lu_solve(system._lu, rhs)


@dataclass(frozen=True)
class HalfSpaceSolution:
    c0: np.ndarray
    theta_inf: float
    outgoing_nodes: np.ndarray
    outgoing: np.ndarray


def recover_solution(system: HalfSpaceSystem, f0, outgoing_nodes=None) -> HalfSpaceSolution:
    """Undamped solution: end state and back-flow at ``outgoing_nodes`` (mu < 0)."""
    c0 = solve_damped(system, f0)
    theta = float(system.flux_covector @ c0) / system.flux_g0
    mu = -system.nodes[::-1] if outgoing_nodes is None else np.asarray(outgoing_nodes, dtype=float)
    E = system.trace_operator(mu)
    trace = E @ c0 - theta * (E @ system.c_g0 - 1.0)
    return HalfSpaceSolution(c0, theta, mu, trace)


def net_flux(system: HalfSpaceSystem, f0, solution: HalfSpaceSolution | None = None) -> float:
    """``<mu f(0)>`` combining exact incoming data with the recovered back-flow.

    Uses the mirrored half-range quadrature; zero for the exact solution.
    """
    u, w = system.nodes, system.weights
    if solution is None or not np.array_equal(solution.outgoing_nodes, -u):
        solution = recover_solution(system, f0, -u)
    return float(0.5 * (np.sum(w * u * system.samples(f0)) - np.sum(w * u * solution.outgoing)))


def end_state_eta(op: CollisionOperator, N: int = DEFAULT_N, alpha: float = DEFAULT_ALPHA) -> float:
    """End state of the half-space problem with incoming data ``mu``."""
    return cached_system(op, N, alpha).end_state(lambda mu: mu)


def _interpolation_matrix(source, target) -> np.ndarray:
    source = np.asarray(source, dtype=float)
    target = np.asarray(target, dtype=float)
    if source.shape == target.shape and np.allclose(source, target, rtol=0, atol=1e-15):
        return np.eye(source.size)
    if source.size < 4:
        raise InvalidArgument("piecewise-cubic transfer needs at least 4 incoming nodes")
    # cubic splines are linear in the data; build the matrix column by column
    return CubicSpline(source, np.eye(source.size), axis=0, extrapolate=True)(target)


@dataclass(frozen=True, eq=False)
class AlbedoMap:
    """Incoming samples (mu > 0) -> back-flow (mu < 0) and end state."""

    matrix: np.ndarray
    w_inf: np.ndarray
    incoming_nodes: np.ndarray
    outgoing_nodes: np.ndarray

    def __call__(self, incoming) -> tuple[np.ndarray, float]:
        incoming = np.asarray(incoming, dtype=float)
        return incoming @ self.matrix.T, incoming @ self.w_inf

    def end_state(self, incoming) -> float:
        return float(np.asarray(incoming, dtype=float) @ self.w_inf)


def albedo_map(system: HalfSpaceSystem, incoming_nodes=None, outgoing_nodes=None) -> AlbedoMap:
    """Matrix form of the Albedo operator.

    Columns are the responses to cardinal data on the system's quadrature
    nodes; nodal data on other ``incoming_nodes`` are transferred by
    piecewise-cubic interpolation first.
    """
    u = system.nodes
    incoming = u if incoming_nodes is None else np.asarray(incoming_nodes, dtype=float)
    outgoing = -u[::-1] if outgoing_nodes is None else np.asarray(outgoing_nodes, dtype=float)
    if np.any(incoming <= 0) or np.any(outgoing >= 0):
        raise InvalidArgument("incoming nodes must be positive and outgoing nodes negative")
    transfer = _interpolation_matrix(incoming, u)
    Cmap = system.boundary_map()
    w_q = system.flux_covector @ Cmap / system.flux_g0
    E = system.trace_operator(outgoing)
    R_q = E @ Cmap - np.outer(E @ system.c_g0 - 1.0, w_q)
    matrix = R_q @ transfer
    w_inf = w_q @ transfer
    for a in (matrix, w_inf, incoming, outgoing):
        a.setflags(write=False)
    return AlbedoMap(matrix, w_inf, incoming, outgoing)


@dataclass(frozen=True)
class ModalExpansion:
    """Decaying modes ``c(y) = sum a_m exp(lambda_m y) r_m`` of a damped solution."""

    rates: np.ndarray
    vectors: np.ndarray
    amplitudes: np.ndarray

    def __call__(self, y) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, dtype=float))
        return np.real((self.vectors * self.amplitudes) @ np.exp(np.outer(self.rates, y))).T


def decaying_modes(system: HalfSpaceSystem, c0) -> ModalExpansion:
    # right eigenvectors: B r = lambda A r
    lam, R = linalg.eig(system.B, system.A)
    tol = TOL_ZERO * np.max(np.abs(lam.real))
    keep = lam.real < -tol
    amplitudes, *_ = np.linalg.lstsq(R[:, keep], np.asarray(c0, dtype=complex), rcond=None)
    return ModalExpansion(lam[keep], R[:, keep], amplitudes)


def evaluate_profile(system: HalfSpaceSystem, solution: HalfSpaceSolution, y, mu) -> np.ndarray:
    """Recovered solution ``f(y, mu)``; returns an array of shape ``(len(y), len(mu))``."""
    E = system.trace_operator(mu)
    f_modes = decaying_modes(system, solution.c0)
    g_modes = decaying_modes(system, system.c_g0)
    return f_modes(y) @ E.T - solution.theta_inf * (g_modes(y) @ E.T - 1.0)

