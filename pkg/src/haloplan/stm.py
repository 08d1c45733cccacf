"""State transition matrix construction for the planning horizon.

Horizon-anchored maps Phi(t -> t_f) are built by two strategies over the
instantaneous LVLH plant: a chained matrix-exponential approximation (the
window split into short time-invariant segments, plant frozen at each segment
start) and direct numerical integration of the variational equations. The
Hill-Clohessy-Wiltshire and Yamanaka-Ankersen two-body solutions are provided
as baselines in the same LVLH axis convention.
"""

import struct
import time
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import _kernels
from .constants import Cr3bpSystem
from .cr3bp import DEFAULT_TOL, SynodicState
from .errors import HaloplanError
from .reldyn import PlantMatrix
from .twobody import OsculatingElements, hcw_stm_rtn, ya_stm_rtn

_EYE6 = np.eye(6)
_PERM = np.zeros((6, 6))
_PERM[:3, :3] = _PERM[3:, 3:] = np.array(
    [[0.0, 0.0, -1.0], [1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]
)
_PERM.flags.writeable = False


def _lvlh_from_rtn_stm(phi_rtn):
    return _PERM.T @ phi_rtn @ _PERM


class Stm:
    """6x6 transition matrix mapping the relative state from t_from to t_to."""

    __slots__ = ("phi", "t_from", "t_to")

    def __init__(self, phi, t_from, t_to):
        phi = np.array(phi, dtype=float)
        if phi.shape != (6, 6):
            raise HaloplanError("Stm must be 6x6")
        if t_from == t_to:
            phi = np.eye(6)
        if np.linalg.det(phi) == 0.0:
            raise HaloplanError("Stm is singular")
        phi.flags.writeable = False
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "t_from", float(t_from))
        object.__setattr__(self, "t_to", float(t_to))

    def __setattr__(self, name, value):
        raise AttributeError("Stm is immutable")

    def __matmul__(self, other):
        if isinstance(other, Stm):
            return Stm(self.phi @ other.phi, other.t_from, self.t_to)
        return self.phi @ other


@dataclass(frozen=True)
class ControlMap:
    """Gamma(t) = Phi(t, t_f) B: impulse at t mapped to its horizon-end effect."""

    gamma: np.ndarray
    t: float


# -- strategies ----------------------------------------------------------------

@dataclass(frozen=True)
class MatrixExponential:
    """Chained time-invariant approximation with segments of at most `step` TU."""

    step: float
    tag = "matexp"

    def __post_init__(self):
        if self.step <= 0.0:
            raise HaloplanError("MatrixExponential step must be positive")


@dataclass(frozen=True)
class NumericalIntegration:
    """Variational-equation integration at the given local tolerance."""

    tol: float = DEFAULT_TOL
    tag = "numint"

    def __post_init__(self):
        if self.tol <= 0.0:
            raise HaloplanError("NumericalIntegration tol must be positive")


@dataclass(frozen=True)
class Hcw:
    """Hill-Clohessy-Wiltshire baseline; mean motion derived from the chief
    osculating orbit about the Moon when not given explicitly."""

    mean_motion: Optional[float] = None
    tag = "hcw"


@dataclass(frozen=True)
class YamanakaAnkersen:
    """Yamanaka-Ankersen elliptic baseline, elements osculated at t_0."""

    tag = "ya"


StmStrategy = Union[MatrixExponential, NumericalIntegration, Hcw, YamanakaAnkersen]

STRATEGY_TAGS = ("matexp", "numint", "hcw", "ya")


class ControlGrid:
    """Precomputed impulse-to-horizon maps over the candidate maneuver times.

    times is the uniform grid t_0 .. t_f; gammas[j] = Phi(t_j, t_f) B; phi0
    carries the full state map from t_0. build_seconds records the wall-clock
    cost of construction (the "STM runtime" figure of merit).
    """

    __slots__ = ("times", "gammas", "phi0", "strategy_tag", "build_seconds")

    def __init__(self, times, gammas, phi0, strategy_tag, build_seconds):
        times = np.array(times, dtype=float)
        gammas = np.array(gammas, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0.0):
            raise HaloplanError("grid times must be strictly increasing")
        if gammas.shape != (times.shape[0], 6, 3):
            raise HaloplanError("gammas must be (n, 6, 3)")
        if phi0.t_to != times[-1]:
            raise HaloplanError("phi0 must map t_0 to the final grid time")
        times.flags.writeable = False
        gammas.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "gammas", gammas)
        object.__setattr__(self, "phi0", phi0)
        object.__setattr__(self, "strategy_tag", str(strategy_tag))
        object.__setattr__(self, "build_seconds", float(build_seconds))

    def __setattr__(self, name, value):
        raise AttributeError("ControlGrid is immutable")

    def __len__(self):
        return self.times.shape[0]

    def control_map(self, j) -> ControlMap:
        return ControlMap(self.gammas[j], self.times[j])


# -- single-map operations -------------------------------------------------------

def lti_stm(a: PlantMatrix, dt, t_from=0.0) -> Stm:
    """Frozen-plant transition over dt via the matrix exponential."""
    if dt < 0.0:
        raise HaloplanError("lti_stm requires dt >= 0")
    if dt == 0.0:
        return Stm(_EYE6, t_from, t_from)
    return Stm(_kernels.expm66(a.a * dt), t_from, t_from + dt)


def elements_from_chief(chief: SynodicState, sys: Cr3bpSystem) -> OsculatingElements:
    """Moon-centered osculating elements from the chief's inertial velocity."""
    r = chief.r
    v_i = chief.v + np.array([-r[1], r[0], 0.0])
    return OsculatingElements.from_rv(r, v_i, sys.mu, t_epoch=chief.t)


def _chief_states_at(chief0: SynodicState, times, sys, tol):
    """Chief states at the requested (sorted ascending) epochs, one integration."""
    times = np.asarray(times, dtype=float)
    if times[0] != chief0.t:
        raise HaloplanError("times must start at the chief epoch")
    return _kernels.integrate("chief", chief0.y, sys.mu, times, tol, tol)


def _matexp_boundaries(t0, tf, step):
    """Segment boundaries anchored at the horizon end, descending from t_f."""
    span = tf - t0
    n_full = int(np.floor(span / step * (1.0 + 1e-12)))
    if abs(n_full * step - span) <= 1e-9 * max(1.0, span):
        n_full = min(n_full, int(round(span / step)))
    bounds = tf - step * np.arange(n_full + 1)
    if bounds[-1] < t0 - 1e-12 * max(1.0, span):
        bounds = bounds[:-1]
    return bounds


def chained_stm(chief0: SynodicState, t_f, step, sys: Cr3bpSystem, tol=DEFAULT_TOL) -> Stm:
    """Multiplicative chain of frozen-plant exponentials from chief0.t to t_f.

    Segments are at most `step` long and anchored at the horizon end; the
    plant is evaluated at each segment start, and the partial products are
    accumulated so the result maps t -> t_f.
    """
    t0 = chief0.t
    if t_f < t0:
        raise HaloplanError("chained_stm requires t_f >= chief epoch")
    if t_f == t0:
        return Stm(_EYE6, t0, t_f)
    bounds = _matexp_boundaries(t0, t_f, step)
    eval_times = np.unique(np.concatenate((bounds, [t0])))
    states = _chief_states_at(chief0, eval_times, sys, tol)
    a_at = {t: _kernels.plant_matrix(states[i], sys.mu) for i, t in enumerate(eval_times)}
    tiny = 1e-12 * max(1.0, t_f - t0)
    phi = _EYE6
    asc = bounds[::-1]  # ascending boundaries
    lead = asc[asc > t0 + tiny]
    gap = (lead[0] if lead.size else t_f) - t0
    if gap > tiny:
        phi = _kernels.expm66(a_at[t0] * gap)
    for i, b in enumerate(lead):
        seg = (lead[i + 1] if i + 1 < lead.size else t_f) - b
        if seg > tiny:
            phi = _kernels.expm66(a_at[b] * seg) @ phi
    return Stm(phi, t0, t_f)


def integrated_stm(chief0: SynodicState, t_f, sys: Cr3bpSystem, tol=DEFAULT_TOL) -> Stm:
    """Exact-to-tolerance transition via the variational equations."""
    t0 = chief0.t
    if t_f == t0:
        return Stm(_EYE6, t0, t_f)
    y0 = np.concatenate((chief0.y, _EYE6.ravel()))
    out = _kernels.integrate("var_forward", y0, sys.mu, np.array([t0, t_f]), tol, tol)
    return Stm(out[-1, 6:].reshape(6, 6), t0, t_f)


def hcw_stm(mean_motion, dt, t_from=0.0) -> Stm:
    """HCW transition in the library's LVLH axis convention."""
    if dt == 0.0:
        return Stm(_EYE6, t_from, t_from)
    return Stm(_lvlh_from_rtn_stm(hcw_stm_rtn(mean_motion, dt)), t_from, t_from + dt)


def ya_stm(elements: OsculatingElements, dt) -> Stm:
    """Yamanaka-Ankersen transition from the element epoch over dt (LVLH axes)."""
    t0 = elements.t_epoch
    if dt == 0.0:
        return Stm(_EYE6, t0, t0)
    return Stm(_lvlh_from_rtn_stm(ya_stm_rtn(elements, t0, t0 + dt)), t0, t0 + dt)


# -- grids -----------------------------------------------------------------------

def _grid_phis_matexp(chief0, times, step, sys, tol):
    t0, tf = times[0], times[-1]
    bounds = _matexp_boundaries(t0, tf, step)
    eval_times = np.unique(np.concatenate((bounds, times)))
    states = _chief_states_at(chief0, eval_times, sys, tol)
    idx = {t: i for i, t in enumerate(eval_times)}
    plant = {}

    def a_at(t):
        if t not in plant:
            plant[t] = _kernels.plant_matrix(states[idx[t]], sys.mu)
        return plant[t]

    tiny = 1e-12 * max(1.0, tf - t0)
    suffix = np.empty((bounds.shape[0], 6, 6))
    suffix[0] = _EYE6
    for k in range(1, bounds.shape[0]):
        seg = bounds[k - 1] - bounds[k]
        suffix[k] = suffix[k - 1] @ _kernels.expm66(a_at(bounds[k]) * seg)

    phis = np.empty((times.shape[0], 6, 6))
    for j, t in enumerate(times):
        m = int(np.floor((tf - t) / step * (1.0 + 1e-12)))
        m = min(m, bounds.shape[0] - 1)
        while bounds[m] < t - tiny:  # guard against floor rounding
            m -= 1
        gap = bounds[m] - t
        if gap > tiny:
            phis[j] = suffix[m] @ _kernels.expm66(a_at(t) * gap)
        else:
            phis[j] = suffix[m]
    phis[-1] = _EYE6
    return phis


def _grid_phis_numint(chief0, times, sys, tol):
    t0, tf = times[0], times[-1]
    chief_tf = _chief_states_at(chief0, np.array([t0, tf]), sys, tol)[-1]
    y0 = np.concatenate((chief_tf, _EYE6.ravel()))
    out = _kernels.integrate("var_backward", y0, sys.mu, times[::-1].copy(), tol, tol)
    phis = out[::-1, 6:].reshape(-1, 6, 6).copy()
    phis[-1] = _EYE6
    return phis


def _grid_phis_twobody(chief0, times, strategy, sys):
    tf = times[-1]
    el = elements_from_chief(chief0, sys)
    phis = np.empty((times.shape[0], 6, 6))
    if isinstance(strategy, Hcw):
        n = strategy.mean_motion if strategy.mean_motion is not None else el.n_mean
        for j, t in enumerate(times):
            phis[j] = _lvlh_from_rtn_stm(hcw_stm_rtn(n, tf - t))
    else:
        for j, t in enumerate(times):
            phis[j] = _lvlh_from_rtn_stm(ya_stm_rtn(el, t, tf))
    phis[-1] = _EYE6
    return phis


def grid_phis(chief0: SynodicState, times, strategy: StmStrategy, sys: Cr3bpSystem):
    """(n, 6, 6) array of Phi(t_j -> t_f) for every grid time."""
    times = np.asarray(times, dtype=float)
    if isinstance(strategy, MatrixExponential):
        return _grid_phis_matexp(chief0, times, strategy.step, sys, DEFAULT_TOL)
    if isinstance(strategy, NumericalIntegration):
        return _grid_phis_numint(chief0, times, sys, strategy.tol)
    if isinstance(strategy, (Hcw, YamanakaAnkersen)):
        return _grid_phis_twobody(chief0, times, strategy, sys)
    raise HaloplanError(f"unknown STM strategy {strategy!r}")


def build_control_grid(scenario, strategy: StmStrategy = None, n_steps=None) -> ControlGrid:
    """Uniform candidate-time grid with Gamma at every time plus Phi(t_0, t_f).

    Reads chief0 (nondimensional SynodicState), window (TU), strategy and
    n_grid_steps from the scenario unless overridden.
    """
    if strategy is None:
        strategy = scenario.strategy
    if n_steps is None:
        n_steps = scenario.n_grid_steps
    if n_steps < 1:
        raise HaloplanError("n_steps must be >= 1")
    chief0 = scenario.chief0
    sys = scenario.system
    t0 = chief0.t
    tf = t0 + scenario.window
    times = np.linspace(t0, tf, n_steps + 1)
    start = time.perf_counter()
    phis = grid_phis(chief0, times, strategy, sys)
    build_seconds = time.perf_counter() - start
    gammas = phis[:, :, 3:].copy()
    phi0 = Stm(phis[0], t0, tf)
    return ControlGrid(times, gammas, phi0, strategy.tag, build_seconds)


def propagation_stms(chief0: SynodicState, sample_times, strategy: StmStrategy, sys: Cr3bpSystem):
    """(n, 6, 6) array of forward maps Phi(t_0 -> t_s) at each sample time."""
    times = np.asarray(sample_times, dtype=float)
    t0 = chief0.t
    if times[0] != t0:
        raise HaloplanError("sample times must start at the chief epoch")
    n_out = times.shape[0]
    if isinstance(strategy, NumericalIntegration):
        y0 = np.concatenate((chief0.y, _EYE6.ravel()))
        out = _kernels.integrate("var_forward", y0, sys.mu, times, strategy.tol, strategy.tol)
        phis = out[:, 6:].reshape(-1, 6, 6).copy()
        phis[0] = _EYE6
        return phis
    if isinstance(strategy, (Hcw, YamanakaAnkersen)):
        el = elements_from_chief(chief0, sys)
        phis = np.empty((n_out, 6, 6))
        if isinstance(strategy, Hcw):
            n = strategy.mean_motion if strategy.mean_motion is not None else el.n_mean
            for j, t in enumerate(times):
                phis[j] = _lvlh_from_rtn_stm(hcw_stm_rtn(n, t - t0))
        else:
            for j, t in enumerate(times):
                phis[j] = _lvlh_from_rtn_stm(ya_stm_rtn(el, t0, t))
        phis[0] = _EYE6
        return phis
    if not isinstance(strategy, MatrixExponential):
        raise HaloplanError(f"unknown STM strategy {strategy!r}")

    # forward chain with segment anchors at t_0
    step = strategy.step
    tf = times[-1]
    n_full = int(np.floor((tf - t0) / step * (1.0 + 1e-12)))
    anchors = t0 + step * np.arange(n_full + 1)
    eval_times = np.unique(np.concatenate((anchors, times)))
    states = _chief_states_at(chief0, eval_times, sys, DEFAULT_TOL)
    idx = {t: i for i, t in enumerate(eval_times)}
    plant = {}

    def a_at(t):
        if t not in plant:
            plant[t] = _kernels.plant_matrix(states[idx[t]], sys.mu)
        return plant[t]

    tiny = 1e-12 * max(1.0, tf - t0)
    prefix = np.empty((anchors.shape[0], 6, 6))
    prefix[0] = _EYE6
    for k in range(1, anchors.shape[0]):
        prefix[k] = _kernels.expm66(a_at(anchors[k - 1]) * step) @ prefix[k - 1]
    phis = np.empty((n_out, 6, 6))
    for j, t in enumerate(times):
        m = int(np.floor((t - t0) / step * (1.0 + 1e-12)))
        m = min(m, anchors.shape[0] - 1)
        while anchors[m] > t + tiny:
            m -= 1
        gap = t - anchors[m]
        if gap > tiny:
            phis[j] = _kernels.expm66(a_at(anchors[m]) * gap) @ prefix[m]
        else:
            phis[j] = prefix[m]
    phis[0] = _EYE6
    return phis


# -- grid cache --------------------------------------------------------------------

_CACHE_MAGIC = b"HPGRID01"


def save_grid(grid: ControlGrid, path):
    """Binary cache: magic, n_times, t0, tf, strategy tag, phi0, then Gamma blocks.

    Layout (little-endian): 8-byte magic, uint64 n_times, float64 t0, float64
    tf, 16-byte zero-padded strategy tag, 36 float64 of Phi(t_0, t_f) row-major,
    then n_times blocks of 18 float64 (the 6x3 Gamma, row-major). Times are
    implied: the grid is uniform over [t0, tf].
    """
    n = len(grid)
    tag = grid.strategy_tag.encode()[:16].ljust(16, b"\0")
    with open(path, "wb") as f:
        f.write(_CACHE_MAGIC)
        f.write(struct.pack("<Qdd", n, grid.times[0], grid.times[-1]))
        f.write(tag)
        f.write(np.ascontiguousarray(grid.phi0.phi).tobytes())
        f.write(np.ascontiguousarray(grid.gammas).tobytes())


def load_grid(path) -> ControlGrid:
    with open(path, "rb") as f:
        if f.read(8) != _CACHE_MAGIC:
            raise HaloplanError(f"{path}: not a control-grid cache file")
        n, t0, tf = struct.unpack("<Qdd", f.read(24))
        tag = f.read(16).rstrip(b"\0").decode()
        phi0 = np.frombuffer(f.read(36 * 8)).reshape(6, 6)
        gammas = np.frombuffer(f.read(n * 18 * 8)).reshape(n, 6, 3)
    times = np.linspace(t0, tf, n)
    return ControlGrid(times, gammas, Stm(phi0, t0, tf), tag, 0.0)
