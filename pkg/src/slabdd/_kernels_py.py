"""Pure-Python versions of the compiled kernels (same signatures and results)."""

import numpy as np


def advect_sweep(f, courant):
    f = np.asarray(f)
    courant = np.asarray(courant, dtype=float)
    if courant.shape != (f.shape[1],):
        raise ValueError("courant numbers do not match the number of directions")
    g = np.pad(f, ((2, 2), (0, 0)), mode="edge")
    jump = g[2:-1] - g[1:-2]
    right = courant >= 0
    up = np.where(right, g[1:-2], g[2:-1])
    upwind = np.where(right, g[1:-2] - g[:-3], g[3:] - g[2:-1])
    prod = upwind * jump
    with np.errstate(divide="ignore", invalid="ignore"):
        limited = np.where(prod > 0, 2.0 * prod / (upwind + jump), 0.0)
    a = np.abs(courant)
    flux = courant * up + 0.5 * a * (1.0 - a) * limited
    f -= flux[1:] - flux[:-1]
    return f


def thomas_solve(lower, diag, upper, rhs):
    n = len(diag)
    if not len(lower) == len(upper) == len(rhs) == n:
        raise ValueError("tridiagonal bands must share one length")
    c = [0.0] * n
    x = [0.0] * n
    c[0] = upper[0] / diag[0]
    x[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / m
    for i in range(n - 2, -1, -1):
        x[i] -= c[i] * x[i + 1]
    return np.asarray(x)
