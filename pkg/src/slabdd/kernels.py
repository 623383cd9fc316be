"""Backend selection for the hot loops.

The Cython extension is used when it has been built; otherwise, or when
``SLABDD_BACKEND=python`` is set, the NumPy fallback is used. Both expose
``advect_sweep(f, courant)`` (in-place) and
``thomas_solve(lower, diag, upper, rhs)``.
"""

import os
from types import SimpleNamespace

from . import _kernels_py

python_backend = SimpleNamespace(
    name="python", advect_sweep=_kernels_py.advect_sweep, thomas_solve=_kernels_py.thomas_solve
)

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    compiled_backend = None
else:
    compiled_backend = SimpleNamespace(
        name="cython", advect_sweep=_compiled.advect_sweep, thomas_solve=_compiled.thomas_solve
    )


def select(name: str | None = None) -> SimpleNamespace:
    name = (name or os.environ.get("SLABDD_BACKEND", "auto")).lower()
    if name == "python":
        return python_backend
    if name in ("cython", "compiled"):
        if compiled_backend is None:
            raise ImportError("the compiled kernels are not built; run `pip install -e .`")
        return compiled_backend
    if name != "auto":
        raise ValueError(f"unknown backend {name!r}")
    return compiled_backend or python_backend


backend = select()
advect_sweep = backend.advect_sweep
thomas_solve = backend.thomas_solve
BACKEND = backend.name
