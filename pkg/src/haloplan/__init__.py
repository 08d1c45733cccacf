"""haloplan: impulsive maneuver planning for cislunar relative motion.

Models chief/deputy relative motion in the circular restricted three-body
problem as a linear time-variant system, builds state transition matrices by
chained matrix-exponential or numerical-integration strategies (plus HCW and
Yamanaka-Ankersen two-body baselines), and computes optimal impulsive plans
with a reachable-set dual solver. Validation tooling covers ground-truth
simulation, seeded Monte Carlo campaigns, and a model predictive control loop.
"""

from ._kernels import BACKEND as kernel_backend
from .constants import Cr3bpSystem, earth_moon, load_constants
from .cr3bp import (
    LvlhFrame,
    SynodicState,
    cr3bp_accel,
    dimensionalize,
    jacobi_constant,
    lvlh_frame,
    nondimensionalize,
    propagate_absolute,
    rtn_from_lvlh,
)
from .reldyn import B_CONTROL, PlantMatrix, RelativeState, grav_gradient_block, plant_matrix, relative_rate

__version__ = "0.1.0"

__all__ = [
    "B_CONTROL",
    "Cr3bpSystem",
    "LvlhFrame",
    "PlantMatrix",
    "RelativeState",
    "SynodicState",
    "cr3bp_accel",
    "dimensionalize",
    "earth_moon",
    "grav_gradient_block",
    "jacobi_constant",
    "kernel_backend",
    "load_constants",
    "lvlh_frame",
    "nondimensionalize",
    "plant_matrix",
    "propagate_absolute",
    "relative_rate",
    "rtn_from_lvlh",
    "__version__",
]
