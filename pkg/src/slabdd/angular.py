"""Angular discretization and the linear collision operator.

Distributions in the direction cosine ``mu`` are stored nodally on a
Gauss-Legendre grid. The collision operator

    L f = f - int_{-1}^{1} kappa(mu, mu') f(mu') dmu'

is represented in the basis of Legendre polynomials normalized so that
``<p_n p_m> = delta_nm`` with ``<f> = 1/2 int f dmu``. For kernels that are
finite Legendre series the matrix is diagonal and ``lambda_n`` are the
familiar relaxation rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import linalg

from .errors import InvalidArgument, InvalidKernel, NotInRange

TOL_MEAN = 1e-10


@dataclass(frozen=True)
class AngularGrid:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def count(self) -> int:
        return self.nodes.size

    @property
    def positive(self) -> np.ndarray:
        return self.nodes > 0

    @property
    def negative(self) -> np.ndarray:
        return self.nodes < 0


def build_angular_grid(n_nodes: int) -> AngularGrid:
    if int(n_nodes) != n_nodes or n_nodes < 2:
        raise InvalidArgument(f"need at least 2 quadrature nodes, got {n_nodes}")
    x, w = npleg.leggauss(int(n_nodes))
    # leggauss is symmetric up to round-off; make it exact
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return AngularGrid(x, w)


def mean(grid: AngularGrid, f) -> float | np.ndarray:
    """``<f> = 1/2 int f dmu`` by quadrature; ``f`` may carry leading axes."""
    return np.asarray(f) @ grid.weights * 0.5


def normalized_legendre(mu, degree: int) -> np.ndarray:
    """Matrix ``V[k, n] = sqrt(2n+1) P_n(mu_k)`` for n = 0..degree."""
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    return npleg.legvander(mu, degree) * np.sqrt(2.0 * np.arange(degree + 1) + 1.0)


@dataclass(frozen=True)
class ScatteringKernel:
    """Scattering kernel ``kappa(mu, mu')``.

    ``legendre`` holds the coefficients ``k_n`` of the expansion
    ``kappa = sum (2n+1)/2 k_n P_n(mu) P_n(mu')`` when the kernel is a finite
    Legendre series; it is ``None`` for kernels given only by an evaluator.
    """

    name: str
    evaluator: Callable[[np.ndarray, np.ndarray], np.ndarray]
    legendre: tuple[float, ...] | None = None

    def __call__(self, mu, mup):
        mu, mup = np.broadcast_arrays(np.asarray(mu, float), np.asarray(mup, float))
        return np.asarray(self.evaluator(mu, mup), dtype=float) * np.ones(mu.shape)


def legendre_series_kernel(coeffs: Sequence[float], name: str = "legendre-series") -> ScatteringKernel:
    k = tuple(float(c) for c in coeffs)
    if not k:
        raise InvalidKernel("empty Legendre coefficient list")
    scale = (2.0 * np.arange(len(k)) + 1.0) / 2.0 * np.asarray(k)

    def evaluate(mu, mup):
        return (npleg.legvander(mu, len(k) - 1) * npleg.legvander(mup, len(k) - 1)) @ scale

    return ScatteringKernel(name, evaluate, k)


def anisotropic_kernel() -> ScatteringKernel:
    """Linearly anisotropic ``kappa = 1/2 + mu mu'/4``; the default kernel."""
    return legendre_series_kernel([1.0, 1.0 / 6.0], name="anisotropic")


def isotropic_kernel() -> ScatteringKernel:
    return legendre_series_kernel([1.0], name="isotropic")


def make_kernel(name: str, coeffs: Sequence[float] | None = None) -> ScatteringKernel:
    if name == "anisotropic":
        return anisotropic_kernel()
    if name == "isotropic":
        return isotropic_kernel()
    if name == "legendre-series":
        if coeffs is None:
            raise InvalidKernel("legendre-series kernel needs a coefficient list")
        return legendre_series_kernel(coeffs)
    raise InvalidKernel(f"unknown kernel {name!r}")


def validate_kernel(kernel: ScatteringKernel, grid: AngularGrid, parity: bool = False) -> np.ndarray:
    """Check nonnegativity, symmetry and normalization on ``grid``; return the node matrix."""
    mu = grid.nodes
    K = kernel(mu[:, None], mu[None, :])
    if not np.all(np.isfinite(K)) or np.any(K < -1e-14):
        raise InvalidKernel(f"kernel {kernel.name!r} is negative or non-finite at quadrature nodes")
    if np.max(np.abs(K - K.T)) > 1e-13 * max(1.0, np.max(np.abs(K))):
        raise InvalidKernel(f"kernel {kernel.name!r} is not symmetric")
    norm = K @ grid.weights
    if np.max(np.abs(norm - 1.0)) > 1e-12:
        raise InvalidKernel(
            f"kernel {kernel.name!r} is not normalized: max |int kappa dmu' - 1| = "
            f"{np.max(np.abs(norm - 1.0)):.3e}"
        )
    if parity and np.max(np.abs(K - K[::-1, ::-1])) > 1e-13:
        raise InvalidKernel(f"kernel {kernel.name!r} does not commute with mu -> -mu")
    return K


@dataclass(frozen=True, eq=False)
class CollisionOperator:
    """Collision operator on a Gauss grid, immutable after construction.

    Attributes
    ----------
    matrix : ndarray
        ``<p_n, L p_m>`` for n, m = 0..degree.
    eigenvalues, eigenvectors : ndarray
        Spectral decomposition of ``matrix``; ``eigenvalues[0] == 0`` belongs
        to the constants.
    to_nodal, to_coeff : ndarray
        Square transforms between nodal values and coefficients.
    """

    kernel: ScatteringKernel
    grid: AngularGrid
    degree: int
    matrix: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    to_nodal: np.ndarray
    to_coeff: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def spectral_gap(self) -> float:
        return float(np.min(self.eigenvalues[1:]))

    @property
    def nodal_matrix(self) -> np.ndarray:
        if "nodal" not in self._cache:
            self._cache["nodal"] = self._pin_constants(self.to_nodal @ self.matrix @ self.to_coeff, 0.0)
        return self._cache["nodal"]

    @property
    def nodal_pseudo_inverse(self) -> np.ndarray:
        if "pinv" not in self._cache:
            Q = self.eigenvectors
            inv = np.zeros_like(self.eigenvalues)
            inv[1:] = 1.0 / self.eigenvalues[1:]
            self._cache["pinv"] = self._pin_constants(self.to_nodal @ (Q * inv) @ Q.T @ self.to_coeff, 0.0)
        return self._cache["pinv"]

    def _pin_constants(self, M: np.ndarray, rowsum: float) -> np.ndarray:
        # the degree-M transforms round-trip only to ~1e-13; a rank-one fix with the
        # half-weights restores exact action on constants without moving the means
        M = M + np.outer(rowsum - M.sum(axis=1), 0.5 * self.grid.weights)
        M.setflags(write=False)
        return M

    def relaxation_matrix(self, s: float) -> np.ndarray:
        """Nodal matrix of ``exp(-s L)``."""
        key = ("relax", float(s))
        if key not in self._cache:
            Q = self.eigenvectors
            R = self.to_nodal @ (Q * np.exp(-s * self.eigenvalues)) @ Q.T @ self.to_coeff
            self._cache[key] = self._pin_constants(R, 1.0)
        return self._cache[key]

    def apply(self, f) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape[-1] != self.grid.count:
            raise InvalidArgument(f"expected {self.grid.count} nodal values, got {f.shape[-1]}")
        return f @ self.nodal_matrix.T

    def apply_inverse(self, g, tol_mean: float = TOL_MEAN) -> np.ndarray:
        """Solve ``L h = g`` with ``<h> = 0``; ``g`` must have zero mean."""
        g = np.asarray(g, dtype=float)
        if g.shape[-1] != self.grid.count:
            raise InvalidArgument(f"expected {self.grid.count} nodal values, got {g.shape[-1]}")
        m = np.max(np.abs(mean(self.grid, g)))
        if m > tol_mean:
            raise NotInRange(f"<g> = {m:.3e} exceeds {tol_mean:.1e}; constants are in the null space")
        return g @ self.nodal_pseudo_inverse.T

    def inverse_mu_coefficients(self) -> np.ndarray:
        """Normalized-Legendre coefficients of ``L^{-1} mu``."""
        c = np.zeros(self.degree + 1)
        c[1] = 1.0 / np.sqrt(3.0)
        Q = self.eigenvectors
        inv = np.zeros_like(self.eigenvalues)
        inv[1:] = 1.0 / self.eigenvalues[1:]
        return (Q * inv) @ Q.T @ c

    def evaluate_series(self, coeffs, mu) -> np.ndarray:
        return normalized_legendre(mu, self.degree) @ coeffs

    def diffusion_coefficient(self) -> float:
        """``<mu L^{-1} mu>``, the diffusion coefficient of the limiting heat equation."""
        # <mu h> = coefficient of p_1 in h divided by sqrt(3)
        return float(self.inverse_mu_coefficients()[1] / np.sqrt(3.0))


def build_collision_operator(kernel: ScatteringKernel, grid: AngularGrid, degree: int | None = None) -> CollisionOperator:
    M = grid.count - 1 if degree is None else int(degree)
    if M < 3:
        raise InvalidArgument(f"degree must be at least 3, got {M}")
    if 2 * M > 2 * grid.count - 1:
        raise InvalidArgument(f"grid with {grid.count} nodes cannot integrate degree {2 * M} exactly")
    K = validate_kernel(kernel, grid)

    V = normalized_legendre(grid.nodes, M)
    T = 0.5 * V.T * grid.weights
    Lmat = np.eye(M + 1) - 0.5 * (V.T * grid.weights) @ K @ (grid.weights[:, None] * V)
    Lmat = 0.5 * (Lmat + Lmat.T)
    # constants are exactly in the null space for a normalized kernel
    Lmat[0, :] = 0.0
    Lmat[:, 0] = 0.0

    off = Lmat - np.diag(np.diag(Lmat))
    if np.max(np.abs(off)) <= 1e-12:
        lam = np.diag(Lmat).copy()
        Q = np.eye(M + 1)
    else:
        sub_lam, sub_Q = linalg.eigh(Lmat[1:, 1:])
        lam = np.concatenate([[0.0], sub_lam])
        Q = np.zeros((M + 1, M + 1))
        Q[0, 0] = 1.0
        Q[1:, 1:] = sub_Q
    lam[0] = 0.0
    if np.any(lam[1:] <= 0):
        raise InvalidKernel(f"kernel {kernel.name!r} has no spectral gap: min lambda_n = {lam[1:].min():.3e}")
    for a in (Lmat, lam, Q, V, T):
        a.setflags(write=False)
    return CollisionOperator(kernel, grid, M, Lmat, lam, Q, V, T)


def split_mean(func: Callable, x=None, n_half: int = 32) -> np.ndarray:
    """``<func(x, .)>`` with Gauss rules on [-1, 0] and [0, 1] separately.

    Exact for data that are polynomial in ``mu`` on each half, such as ``|mu|``.
    With ``x`` omitted ``func`` takes ``mu`` only.
    """
    t, w = npleg.leggauss(n_half)
    mu = np.concatenate([0.5 * (t - 1.0), 0.5 * (t + 1.0)])
    wt = np.concatenate([0.5 * w, 0.5 * w])
    if x is None:
        return float(0.5 * np.sum(wt * np.asarray(func(mu), dtype=float)))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    vals = np.asarray(func(x[:, None], mu[None, :]), dtype=float) * np.ones((x.size, mu.size))
    return 0.5 * vals @ wt
