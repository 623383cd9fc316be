import numpy as np
import pytest

from slabdd.angular import build_angular_grid, build_collision_operator, isotropic_kernel, anisotropic_kernel
from slabdd.halfspace import cached_system


@pytest.fixture(scope="session")
def grid32():
    return build_angular_grid(32)


@pytest.fixture(scope="session")
def aniso_op(grid32):
    return build_collision_operator(anisotropic_kernel(), grid32)


@pytest.fixture(scope="session")
def iso_op(grid32):
    return build_collision_operator(isotropic_kernel(), grid32)


@pytest.fixture(scope="session")
def aniso_system(aniso_op):
    return cached_system(aniso_op, 16, 0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
