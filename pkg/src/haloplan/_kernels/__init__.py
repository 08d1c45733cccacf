"""Kernel backend selection.

The compiled Cython core is used when present; otherwise the pure NumPy
reference implementation takes over. Set HALOPLAN_PURE=1 to force the pure
backend (useful for debugging and for the backend-comparison benchmark).

Both backends expose the same flat-array API:
    accel(y6, mu) -> (3,)
    lvlh_kinematics(y6, mu) -> (basis (3,3), omega (3,), omega_dot (3,))
    plant_matrix(y6, mu) -> (6,6)
    expm66(a) -> (6,6)
    integrate(mode, y0, mu, times, rtol, atol) -> (len(times), dim)
with modes "chief" (6), "chief_deputy" (12), "var_forward"/"var_backward"
(relative-dynamics STM, 42) and "var_abs" (absolute-flow variational, 42).
"""

import os

from . import _ref as pure

if os.environ.get("HALOPLAN_PURE", "").strip() not in ("", "0"):
    impl = pure
else:
    try:
        from . import _core as impl  # type: ignore[no-redef]

        if not hasattr(impl, "integrate"):  # stale or partial build
            impl = pure
    except ImportError:
        impl = pure

BACKEND = impl.BACKEND
accel = impl.accel
lvlh_kinematics = impl.lvlh_kinematics
plant_matrix = impl.plant_matrix
expm66 = impl.expm66
integrate = impl.integrate

__all__ = [
    "BACKEND",
    "accel",
    "expm66",
    "integrate",
    "lvlh_kinematics",
    "plant_matrix",
    "pure",
]
