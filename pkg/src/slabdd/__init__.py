"""Kinetic/diffusion domain decomposition for slab transport."""

from .angular import (
    AngularGrid,
    CollisionOperator,
    ScatteringKernel,
    anisotropic_kernel,
    build_angular_grid,
    build_collision_operator,
    isotropic_kernel,
    legendre_series_kernel,
    make_kernel,
)
from .coupled import CoupledProblem, run_coupled, run_stability
from .errors import (
    ConfigError,
    DegenerateSystem,
    IllPosedDiscretization,
    InvalidArgument,
    InvalidKernel,
    InvalidTimestep,
    NotInRange,
)
from .experiments import (
    CaseSpec,
    ErrorReport,
    SolverParams,
    convergence_slope,
    error_norms,
    make_case,
    run_coupled_suite,
    run_pure_suite,
)
from .halfspace import albedo_map, build_halfspace_system, cached_system, end_state_eta, recover_solution
from .heat import HeatGrid, heat_step, run_heat
from .kernels import BACKEND
from .kinetic import KineticData, KineticGrid, SigmaProfile, run_reference

__version__ = "0.1.0"
