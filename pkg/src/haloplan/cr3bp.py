"""Absolute chief motion in the circular restricted three-body problem.

States live in the moon-centered synodic frame (x toward the Earth, z along
the system angular momentum) and are nondimensional everywhere inside the
library: positions in DU, velocities in DU/TU, epochs in TU.
"""

import numpy as np

from . import _kernels
from .constants import Cr3bpSystem
from .errors import HaloplanError

DEFAULT_TOL = 1e-12

#: Signed permutation taking LVLH components to radial/tangential/normal.
_RTN_FROM_LVLH = np.array(
    [
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)


def _readonly(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


class SynodicState:
    """Chief position/velocity in the moon-centered synodic frame at epoch t.

    Immutable; arrays are copied in and frozen so instances are safe to share
    across workers.
    """

    __slots__ = ("r", "v", "t")

    def __init__(self, r, v, t=0.0):
        r = _readonly(r)
        v = _readonly(v)
        if r.shape != (3,) or v.shape != (3,):
            raise HaloplanError("SynodicState needs 3-vectors for r and v")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(v))):
            raise HaloplanError("SynodicState components must be finite")
        if float(r @ r) == 0.0:
            raise HaloplanError("SynodicState at the Moon's center is not allowed")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "t", float(t))

    def __setattr__(self, name, value):
        raise AttributeError("SynodicState is immutable")

    @property
    def y(self):
        """Flat [r, v] 6-vector."""
        return np.concatenate((self.r, self.v))

    @classmethod
    def from_vector(cls, y, t=0.0):
        return cls(y[:3], y[3:6], t)

    def __repr__(self):
        return f"SynodicState(r={self.r.tolist()}, v={self.v.tolist()}, t={self.t})"


class LvlhFrame:
    """Chief-centered LVLH frame: basis rows i, j, k in synodic coordinates.

    k points from the chief to the Moon and j is anti-parallel to the chief's
    angular momentum. omega is the frame's inertial angular velocity in LVLH
    components (1/TU); omega_dot its LVLH-frame derivative (1/TU^2).
    """

    __slots__ = ("basis", "omega", "omega_dot")

    def __init__(self, basis, omega, omega_dot):
        object.__setattr__(self, "basis", _readonly(basis))
        object.__setattr__(self, "omega", _readonly(omega))
        object.__setattr__(self, "omega_dot", _readonly(omega_dot))

    def __setattr__(self, name, value):
        raise AttributeError("LvlhFrame is immutable")


def cr3bp_accel(state: SynodicState, sys: Cr3bpSystem):
    """Total synodic-frame acceleration of the chief (nondimensional)."""
    return _kernels.accel(state.y, sys.mu)


def propagate_absolute(state: SynodicState, t1, sys: Cr3bpSystem, tol=DEFAULT_TOL):
    """Propagate the chief to epoch t1 with the adaptive integrator.

    Backward propagation (t1 < state.t) is supported; the dynamics are
    reversible to integration tolerance.
    """
    if t1 == state.t:
        return state
    ys = _kernels.integrate("chief", state.y, sys.mu, np.array([state.t, t1]), tol, tol)
    return SynodicState.from_vector(ys[-1], t1)


def propagate_table(state: SynodicState, times, sys: Cr3bpSystem, tol=DEFAULT_TOL):
    """Chief states at each epoch of a monotonic times array, (n, 6)."""
    times = np.asarray(times, dtype=float)
    if times[0] != state.t:
        raise HaloplanError(f"times must start at the state epoch {state.t}, got {times[0]}")
    return _kernels.integrate("chief", state.y, sys.mu, times, tol, tol)


def lvlh_frame(state: SynodicState, sys: Cr3bpSystem) -> LvlhFrame:
    """LVLH basis and angular rates for the given chief state."""
    basis, omega, omega_dot = _kernels.lvlh_kinematics(state.y, sys.mu)
    return LvlhFrame(basis, omega, omega_dot)


def rtn_from_lvlh(vec):
    """Apply the signed axis permutation from LVLH to RTN components."""
    return _RTN_FROM_LVLH @ np.asarray(vec, dtype=float)


def lvlh_from_rtn(vec):
    return _RTN_FROM_LVLH.T @ np.asarray(vec, dtype=float)


def nondimensionalize(state_km: SynodicState, sys: Cr3bpSystem) -> SynodicState:
    """km, km/s -> DU, DU/TU (epoch is already TU)."""
    return SynodicState(
        sys.km_to_du(state_km.r), sys.kmps_to_duptu(state_km.v), state_km.t
    )


def dimensionalize(state: SynodicState, sys: Cr3bpSystem) -> SynodicState:
    """DU, DU/TU -> km, km/s."""
    return SynodicState(sys.du_to_km(state.r), sys.duptu_to_kmps(state.v), state.t)


def jacobi_constant(state: SynodicState, sys: Cr3bpSystem):
    """Jacobi integral in the conventional barycentric normalization."""
    mu = sys.mu
    r = state.r
    v = state.v
    x_b = (1.0 - mu) - r[0]
    y_b = -r[1]
    r_moon = float(np.sqrt(r @ r))
    re = r - np.array([1.0, 0.0, 0.0])
    r_earth = float(np.sqrt(re @ re))
    return (
        x_b * x_b
        + y_b * y_b
        + 2.0 * (1.0 - mu) / r_earth
        + 2.0 * mu / r_moon
        - float(v @ v)
    )


def collinear_point(sys: Cr3bpSystem, which: int):
    """x coordinate (synodic, moon-centered) of the collinear equilibrium L1/L2/L3."""
    brackets = {1: (1e-3, 1.0 - 1e-3), 2: (-0.9, -1e-3), 3: (1.1, 2.9)}
    try:
        lo, hi = brackets[which]
    except KeyError:
        raise HaloplanError(f"collinear point index must be 1, 2 or 3, got {which}")

    def f(x):
        st = SynodicState(np.array([x, 0.0, 0.0]), np.zeros(3))
        return float(cr3bp_accel(st, sys)[0])

    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0.0:
        raise HaloplanError(f"no sign change for L{which} in bracket ({lo}, {hi})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)
