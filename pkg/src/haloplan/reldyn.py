"""Linearized LVLH relative motion: plant matrix A(t) and control matrix B.

The deputy state x = [rho, rho_dot] evolves as x_dot = A(t) x + B u, with
A assembled from the chief's LVLH frame kinematics and the gravity-gradient
tensors of both primaries, all expressed in LVLH coordinates.
"""

import numpy as np

from . import _kernels
from .constants import Cr3bpSystem
from .cr3bp import SynodicState
from .errors import HaloplanError

#: Control matrix: impulses change relative velocity only. Exact by construction.
B_CONTROL = np.zeros((6, 3))
B_CONTROL[3:, :] = np.eye(3)
B_CONTROL.flags.writeable = False


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class RelativeState:
    """Deputy position/velocity relative to the chief, LVLH components."""

    __slots__ = ("rho", "rho_dot", "t")

    def __init__(self, rho, rho_dot, t=0.0):
        rho = _readonly(rho)
        rho_dot = _readonly(rho_dot)
        if rho.shape != (3,) or rho_dot.shape != (3,):
            raise HaloplanError("RelativeState needs 3-vectors for rho and rho_dot")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(rho_dot))):
            raise HaloplanError("RelativeState components must be finite")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "rho_dot", rho_dot)
        object.__setattr__(self, "t", float(t))

    def __setattr__(self, name, value):
        raise AttributeError("RelativeState is immutable")

    @property
    def x(self):
        """Flat [rho, rho_dot] 6-vector."""
        return np.concatenate((self.rho, self.rho_dot))

    @classmethod
    def from_vector(cls, x, t=0.0):
        return cls(x[:3], x[3:6], t)

    def scaled(self, pos_factor, vel_factor):
        return RelativeState(self.rho * pos_factor, self.rho_dot * vel_factor, self.t)

    def __repr__(self):
        return (
            f"RelativeState(rho={self.rho.tolist()}, rho_dot={self.rho_dot.tolist()}, "
            f"t={self.t})"
        )


class PlantMatrix:
    """6x6 plant matrix of the linearized relative dynamics at one epoch."""

    __slots__ = ("a",)

    def __init__(self, a):
        a = _readonly(a)
        if a.shape != (6, 6):
            raise HaloplanError("PlantMatrix must be 6x6")
        object.__setattr__(self, "a", a)

    def __setattr__(self, name, value):
        raise AttributeError("PlantMatrix is immutable")


def grav_gradient_block(chief: SynodicState, sys: Cr3bpSystem):
    """Lower-left 3x3 block of A(t): frame terms plus both tidal tensors.

    The Earth tensor is evaluated at the chief's position relative to the
    Earth; signs follow from differentiating the relative gravity field, so
    the block matches a finite-difference Jacobian of the nonlinear relative
    dynamics at zero separation.
    """
    return _kernels.plant_matrix(chief.y, sys.mu)[3:, :3].copy()


def plant_matrix(chief: SynodicState, sys: Cr3bpSystem) -> PlantMatrix:
    """Assemble the full plant matrix at the chief's current state."""
    return PlantMatrix(_kernels.plant_matrix(chief.y, sys.mu))


def relative_rate(x: RelativeState, a: PlantMatrix, u=None):
    """State rate A x + B u of the linear relative dynamics."""
    rate = a.a @ x.x
    if u is not None:
        rate = rate + B_CONTROL @ np.asarray(u, dtype=float)
    return rate
