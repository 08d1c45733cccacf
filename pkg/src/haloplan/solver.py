"""Impulsive maneuver planning from reachable-set optimality conditions.

Pipeline: form the pseudostate (the state change the impulses must produce at
the horizon end), find the dual supporting direction by solving a small
second-order-cone program over a working set of candidate times, iteratively
exchange candidates against full-grid contact sweeps, then extract impulse
magnitudes along the optimal directions with nonnegative least squares.

Everything here is nondimensional; unit conversion happens at the I/O layer.
The solver is deterministic for fixed inputs and configuration.
"""

import time
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .errors import ConvergenceError, HaloplanError
from .nnls import nnls
from .reldyn import RelativeState
from .socp import solve_socp
from .stm import ControlGrid, ControlMap, StmStrategy, build_control_grid

#: Pseudostates below this size (relative to the commanded states) are
#: treated as ballistically reachable: empty plan, zero cost.
ZERO_OMEGA_RTOL = 1e-9

#: Contact values below this are direction-degenerate.
DEGENERATE_CONTACT = 1e-14


@dataclass(frozen=True)
class Pseudostate:
    """Required impulse effect at the horizon end: x_f - Phi(t_0) x_0."""

    omega: np.ndarray

    def __post_init__(self):
        omega = np.asarray(self.omega, dtype=float)
        if omega.shape != (6,) or not np.all(np.isfinite(omega)):
            raise HaloplanError("pseudostate must be a finite 6-vector")
        object.__setattr__(self, "omega", omega)

    @property
    def norm(self):
        return float(np.linalg.norm(self.omega))


@dataclass(frozen=True)
class DualVector:
    """Supporting-hyperplane normal of the reachable set at the optimum."""

    lam: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if lam.shape != (6,) or not np.all(np.isfinite(lam)):
            raise HaloplanError("dual vector must be a finite 6-vector")
        object.__setattr__(self, "lam", lam)


class CandidateSet(tuple):
    """Sorted unique grid indices forming the working set of maneuver times."""

    def __new__(cls, indices, n_grid=None):
        idx = sorted(set(int(i) for i in indices))
        if not idx:
            raise HaloplanError("candidate set must hold at least one index")
        if n_grid is not None and (idx[0] < 0 or idx[-1] >= n_grid):
            raise HaloplanError("candidate index outside the grid")
        return super().__new__(cls, idx)


@dataclass(frozen=True)
class Impulse:
    t: float
    dv: np.ndarray  # LVLH, DU/TU

    def __post_init__(self):
        dv = np.asarray(self.dv, dtype=float)
        if dv.shape != (3,):
            raise HaloplanError("impulse dv must be a 3-vector")
        object.__setattr__(self, "dv", dv)

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.dv))


@dataclass(frozen=True)
class ManeuverPlan:
    """Ordered impulses with their summed two-norm cost (nondimensional)."""

    impulses: Tuple[Impulse, ...]

    @property
    def cost(self):
        return float(sum(imp.magnitude for imp in self.impulses))

    def cost_mps(self, sys):
        return self.cost * sys.vu_kmps * 1000.0

    @property
    def times(self):
        return np.array([imp.t for imp in self.impulses])

    def __len__(self):
        return len(self.impulses)


@dataclass(frozen=True)
class SolverConfig:
    eps_cost: float = 1e-5
    eps_remove: float = 1e-2
    init_stride: int = 10
    init_keep: int = 10
    max_refine_iters: int = 50
    socp_tol: float = 1e-10

    def __post_init__(self):
        if min(self.eps_cost, self.eps_remove, self.socp_tol) <= 0.0:
            raise HaloplanError("solver tolerances must be positive")
        if self.eps_remove >= 1.0:
            raise HaloplanError("eps_remove must be below one")
        if min(self.init_stride, self.init_keep, self.max_refine_iters) < 1:
            raise HaloplanError("solver counts must be at least one")


@dataclass(frozen=True)
class SolverReport:
    lambda_opt: Optional[DualVector]
    refine_iterations: int
    dual_value: float
    primal_cost: float
    candidate_history: Tuple[CandidateSet, ...]
    stm_runtime_s: float
    solver_runtime_s: float
    strategy_tag: str
    n_grid: int
    residual_norm: float
    reachability_flag: bool
    config: SolverConfig = field(default_factory=SolverConfig)

    @property
    def duality_gap(self):
        return abs(self.dual_value - self.primal_cost) / max(self.primal_cost, 1e-300)


@dataclass(frozen=True)
class Contact:
    """Support-function value and maximizing direction of one impulse map."""

    value: float
    direction: Optional[np.ndarray]

    @property
    def degenerate(self):
        return self.direction is None


def pseudostate(x0: RelativeState, xf: RelativeState, grid: ControlGrid) -> Pseudostate:
    """Target state change at t_f net of the free drift of x0."""
    return Pseudostate(xf.x - grid.phi0.phi @ x0.x)


def contact(gamma: ControlMap, lam) -> Contact:
    """Evaluate the contact function of one impulse map against lam."""
    lam = lam.lam if isinstance(lam, DualVector) else np.asarray(lam, dtype=float)
    v = gamma.gamma.T @ lam
    value = float(np.linalg.norm(v))
    if value < DEGENERATE_CONTACT:
        return Contact(value, None)
    return Contact(value, v / value)


def contact_sweep(grid: ControlGrid, lam):
    """Contact value at every grid time, vectorized."""
    lam = lam.lam if isinstance(lam, DualVector) else np.asarray(lam, dtype=float)
    proj = np.einsum("nij,i->nj", grid.gammas, lam)
    return np.sqrt(np.sum(proj * proj, axis=1))


def initialize(omega: Pseudostate, grid: ControlGrid, cfg: SolverConfig) -> CandidateSet:
    """Seed the working set with the best contact times against omega-hat."""
    if omega.norm == 0.0:
        raise HaloplanError("cannot initialize from a zero pseudostate")
    lam0 = omega.omega / omega.norm
    sampled = np.arange(0, len(grid), cfg.init_stride)
    values = contact_sweep(grid, lam0)[sampled]
    keep = min(cfg.init_keep, sampled.shape[0])
    top = sampled[np.argsort(values)[::-1][:keep]]
    return CandidateSet(top, n_grid=len(grid))


def solve_dual(omega: Pseudostate, t_est: CandidateSet, grid: ControlGrid, cfg: SolverConfig):
    """Dual vector maximizing lam . omega over the working-set cone constraints.

    The feasible set does not depend on the pseudostate's magnitude, so the
    program is solved against the unit pseudostate direction; the reported
    dual value is restored to the caller's scale.
    """
    if omega.norm == 0.0:
        raise HaloplanError("zero pseudostate has no dual")
    g = grid.gammas[list(t_est)]
    lam, info = solve_socp(g, omega.omega / omega.norm, tol=cfg.socp_tol)
    return DualVector(lam), info.objective * omega.norm


def refine(
    omega: Pseudostate,
    grid: ControlGrid,
    cfg: SolverConfig,
    t_est: Optional[CandidateSet] = None,
):
    """Exchange candidate times until no grid time beats the dual support.

    At each pass the dual is re-solved on the working set, candidates whose
    contact value dropped below 1 - eps_remove are discarded, and every grid
    time above 1 + eps_cost is admitted. Terminates when the full grid is
    clean; the final sweep therefore certifies optimality over the whole
    grid, not just the working set.
    """
    if t_est is None:
        t_est = initialize(omega, grid, cfg)
    history = [t_est]
    lam = None
    for iteration in range(1, cfg.max_refine_iters + 1):
        lam, _ = solve_dual(omega, t_est, grid, cfg)
        values = contact_sweep(grid, lam)
        violators = np.flatnonzero(values > 1.0 + cfg.eps_cost)
        new_violators = [int(j) for j in violators if j not in t_est]
        keep = [j for j in t_est if values[j] >= 1.0 - cfg.eps_remove]
        if not keep:
            keep = [int(np.argmax(values))]
        if not new_violators:
            final = CandidateSet(keep, n_grid=len(grid))
            if final != t_est:
                history.append(final)
            return final, lam, iteration, tuple(history)
        t_est = CandidateSet(keep + new_violators, n_grid=len(grid))
        history.append(t_est)
    raise ConvergenceError(
        f"candidate refinement did not settle in {cfg.max_refine_iters} passes"
    )


def extract_inputs(
    omega: Pseudostate, t_est: CandidateSet, lam: DualVector, grid: ControlGrid
):
    """Impulse magnitudes along the dual-optimal directions at the chosen times.

    Directions are fixed by the contact function; magnitudes minimize the
    pseudostate error with identity weighting under nonnegativity. Returns
    (plan, residual_norm); zero-magnitude candidates are pruned, and the
    active-set solve keeps the impulse count at or below the state dimension.
    """
    directions = []
    usable = []
    for j in t_est:
        c = contact(grid.control_map(j), lam)
        if c.degenerate:
            continue
        directions.append(c.direction)
        usable.append(j)
    if not usable:
        raise HaloplanError("all candidate directions are degenerate")
    cols = np.column_stack([grid.gammas[j] @ d for j, d in zip(usable, directions)])
    mags, residual = nnls(cols, omega.omega)
    prune = np.max(mags) * 1e-12 if mags.size else 0.0
    impulses = tuple(
        Impulse(grid.times[j], m * d)
        for j, d, m in zip(usable, directions, mags)
        if m > prune
    )
    return ManeuverPlan(impulses), residual


def plan(scenario, strategy: StmStrategy = None, cfg: SolverConfig = None):
    """Full pipeline: grid, pseudostate, initialization, refinement, extraction.

    Returns (ManeuverPlan, SolverReport). Wall-clock is split between grid
    construction and the solve itself.
    """
    if cfg is None:
        cfg = getattr(scenario, "solver_cfg", None) or SolverConfig()
    grid = build_control_grid(scenario, strategy)
    omega = pseudostate(scenario.deputy0, scenario.deputy_f, grid)

    t_start = time.perf_counter()
    scale = max(
        float(np.linalg.norm(scenario.deputy_f.x)),
        float(np.linalg.norm(grid.phi0.phi @ scenario.deputy0.x)),
    )
    if omega.norm <= ZERO_OMEGA_RTOL * scale or omega.norm == 0.0:
        report = SolverReport(
            lambda_opt=None,
            refine_iterations=0,
            dual_value=0.0,
            primal_cost=0.0,
            candidate_history=(),
            stm_runtime_s=grid.build_seconds,
            solver_runtime_s=time.perf_counter() - t_start,
            strategy_tag=grid.strategy_tag,
            n_grid=len(grid),
            residual_norm=omega.norm,
            reachability_flag=False,
            config=cfg,
        )
        return ManeuverPlan(()), report

    t_est, lam, iterations, history = refine(omega, grid, cfg)
    maneuver_plan, residual = extract_inputs(omega, t_est, lam, grid)
    dual_value = float(lam.lam @ omega.omega)
    solver_runtime = time.perf_counter() - t_start

    report = SolverReport(
        lambda_opt=lam,
        refine_iterations=iterations,
        dual_value=dual_value,
        primal_cost=maneuver_plan.cost,
        candidate_history=history,
        stm_runtime_s=grid.build_seconds,
        solver_runtime_s=solver_runtime,
        strategy_tag=grid.strategy_tag,
        n_grid=len(grid),
        residual_norm=residual,
        reachability_flag=residual > 1e-6 * max(omega.norm, 1e-300),
        config=cfg,
    )
    return maneuver_plan, report
