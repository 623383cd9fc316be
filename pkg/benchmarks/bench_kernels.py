"""Compare the compiled and NumPy backends on the two hot loops.

    python3 benchmarks/bench_kernels.py [--cells 4000] [--directions 32] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from slabdd import kernels


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cells", type=int, default=4000)
    ap.add_argument("--directions", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    f0 = rng.random((args.cells, args.directions))
    nu = np.linspace(-0.5, 0.5, args.directions)
    n = args.cells
    lower, upper = -np.ones(n), -np.ones(n)
    diag, rhs = np.full(n, 2.5), rng.random(n)

    backends = [kernels.python_backend] + ([kernels.compiled_backend] if kernels.compiled_backend else [])
    results = {}
    for be in backends:
        f = f0.copy()
        t_adv = min(timeit.repeat(lambda: be.advect_sweep(f, nu), number=1, repeat=args.repeat))
        t_tri = min(timeit.repeat(lambda: be.thomas_solve(lower, diag, upper, rhs), number=1, repeat=args.repeat))
        results[be.name] = (t_adv, t_tri)
        print(f"{be.name:>7}: advect_sweep {1e3 * t_adv:8.3f} ms   thomas_solve {1e3 * t_tri:8.3f} ms")
    if len(results) == 2:
        (pa, pt), (ca, ct) = results["python"], results["cython"]
        print(f"speed-up: advect_sweep x{pa / ca:.1f}, thomas_solve x{pt / ct:.1f}")
    else:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
