"""Exception hierarchy. Exit codes: config errors map to 2, solver failures to 3."""


class HydresimError(Exception):
    pass


class ConfigError(HydresimError):
    """Bad scenario/parameter input. CLI exit code 2."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}:" if line is None else f"{path}:{line}:"
        super().__init__(f"{loc} {message}" if loc else message)
        self.path = path
        self.line = line


class InternalError(HydresimError):
    """Inconsistent internal state (sizes, indices)."""


class DegenerateStateError(HydresimError):
    """Physically degenerate state (no pore fluid, S_w + S_g = 0, ...)."""


class EosError(HydresimError):
    """Cubic equation of state produced no usable root."""


class AssemblyError(HydresimError):
    """Non-finite value met during residual/matrix assembly."""


class LinearSolveError(HydresimError):
    """Direct sparse solve failed its residual contract."""


class NewtonError(HydresimError):
    """Newton iteration failed to converge; caller may cut the time step."""

    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SolverError(HydresimError):
    """Hard failure of a simulation run. CLI exit code 3."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
