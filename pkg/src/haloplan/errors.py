"""Exception hierarchy. CLI maps these to stable exit codes."""


class HaloplanError(Exception):
    """Base class for all package errors."""


class SingularityError(HaloplanError):
    """State too close to one of the primaries for the dynamics to be valid."""


class DegenerateFrameError(HaloplanError):
    """Chief angular momentum too small to define an LVLH frame."""


class IntegrationError(HaloplanError):
    """Adaptive integrator failed (step-size underflow or non-finite state)."""


class SolverError(HaloplanError):
    """Base class for maneuver-solver failures."""


class InfeasibleTargetError(SolverError):
    """Pseudostate not reachable within the dynamics model (unbounded dual)."""


class ConvergenceError(SolverError):
    """Iteration limit reached before meeting the requested tolerance."""


class ScenarioError(HaloplanError):
    """Scenario/constants file failed schema validation."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class CatalogError(HaloplanError):
    """Halo catalog file failed schema or consistency validation."""

    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class SimulationError(HaloplanError):
    """Ground-truth simulation failed."""
