# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: limited Lax-Wendroff advection and tridiagonal solves."""

import numpy as np
cimport numpy as cnp
from libc.string cimport memcpy

cnp.import_array()


cdef inline double limited_jump(double upwind, double jump) noexcept nogil:
    # van Leer: phi(r) * jump with r = upwind / jump
    if upwind * jump <= 0.0:
        return 0.0
    return 2.0 * upwind * jump / (upwind + jump)


def advect_sweep(double[:, ::1] f, const double[::1] courant):
    """Advance every direction one step in place.

    ``f`` has shape (cells, directions); ``courant[j] = mu_j dt / (eps dx)``.
    Two ghost cells per side hold copies of the boundary cell.
    """
    cdef Py_ssize_t nx = f.shape[0], nm = f.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double nu, anu, up, jump, upw, flux
    cdef double[:, ::1] g = np.empty((nx + 4, nm))
    cdef double[::1] left = np.empty(nm)
    if courant.shape[0] != nm:
        raise ValueError("courant numbers do not match the number of directions")
    with nogil:
        memcpy(&g[2, 0], &f[0, 0], nx * nm * sizeof(double))
        for j in range(nm):
            g[0, j] = f[0, j]
            g[1, j] = f[0, j]
            g[nx + 2, j] = f[nx - 1, j]
            g[nx + 3, j] = f[nx - 1, j]
        # face k sits between extended cells k and k+1; real faces are k = 1..nx+1
        for k in range(1, nx + 2):
            for j in range(nm):
                nu = courant[j]
                jump = g[k + 1, j] - g[k, j]
                if nu >= 0.0:
                    anu = nu
                    up = g[k, j]
                    upw = g[k, j] - g[k - 1, j]
                else:
                    anu = -nu
                    up = g[k + 1, j]
                    upw = g[k + 2, j] - g[k + 1, j]
                flux = nu * up + 0.5 * anu * (1.0 - anu) * limited_jump(upw, jump)
                if k > 1:
                    f[k - 2, j] -= flux - left[j]
                left[j] = flux
    return np.asarray(f)


def thomas_solve(const double[::1] lower, const double[::1] diag, const double[::1] upper, const double[::1] rhs):
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    cdef Py_ssize_t n = diag.shape[0], i
    cdef double m
    cdef double[::1] c = np.empty(n)
    cdef double[::1] x = np.empty(n)
    if lower.shape[0] != n or upper.shape[0] != n or rhs.shape[0] != n:
        raise ValueError("tridiagonal bands must share one length")
    with nogil:
        c[0] = upper[0] / diag[0]
        x[0] = rhs[0] / diag[0]
        for i in range(1, n):
            m = diag[i] - lower[i] * c[i - 1]
            c[i] = upper[i] / m
            x[i] = (rhs[i] - lower[i] * x[i - 1]) / m
        for i in range(n - 2, -1, -1):
            x[i] -= c[i] * x[i + 1]
    return np.asarray(x)
