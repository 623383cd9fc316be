"""Exception types raised by the solvers."""


class InvalidArgument(ValueError):
    pass


class InvalidKernel(ValueError):
    pass


class NotInRange(ValueError):
    """Right-hand side has a component in the null space of the collision operator."""


class InvalidTimestep(ValueError):
    pass


class DegenerateSystem(RuntimeError):
    """The half-space pencil does not have the expected (N, 1, N) inertia."""


class IllPosedDiscretization(RuntimeError):
    pass


class ConfigError(ValueError):
    pass
