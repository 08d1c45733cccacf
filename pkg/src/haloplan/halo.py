"""Periodic halo-orbit tooling: differential correction and period targeting.

Halo orbits are symmetric about the x-z plane, so a state with y = vx = vz = 0
that returns to y = 0 with vx = vz = 0 half a period later is periodic. The
correctors below use the forward variational flow for their Newton steps.
Used by the catalog generator script and by tests that need true periodic
states; not on any planning hot path.
"""

import numpy as np

from . import _kernels
from .constants import Cr3bpSystem
from .cr3bp import SynodicState
from .errors import ConvergenceError

_CROSS_TOL = 1e-13
_NEWTON_TOL = 1e-12
_MAX_NEWTON = 40


def _flow(y0, t0, t1, mu, tol, n_out=2):
    times = np.linspace(t0, t1, n_out)
    return _kernels.integrate("chief", y0, mu, times, tol, tol)


def _flow_var(y0, tau, mu, tol):
    y0v = np.concatenate((y0, np.eye(6).ravel()))
    out = _kernels.integrate("var_abs", y0v, mu, np.array([0.0, tau]), tol, tol)
    return out[-1, :6], out[-1, 6:].reshape(6, 6)


def next_plane_crossing(state: SynodicState, sys: Cr3bpSystem, t_hint, tol=1e-12):
    """Epoch (relative to state.t) of the next y = 0 crossing near t_hint.

    Scans a grid around the hint for a sign change, then bisects. Raises if no
    crossing is found within [0.2, 2.0] * t_hint.
    """
    mu = sys.mu
    y0 = state.y
    lo_t, hi_t = 0.05 * t_hint, 3.0 * t_hint
    grid = state.t + np.linspace(0.0, hi_t, 601)
    ys = _kernels.integrate("chief", y0, mu, grid, tol, tol)
    ycomp = ys[:, 1]
    bracket = None
    for k in range(1, len(grid) - 1):
        if grid[k] - state.t < lo_t:
            continue
        if ycomp[k] == 0.0:
            return grid[k] - state.t
        if ycomp[k] * ycomp[k + 1] < 0.0:
            bracket = k
            break
    if bracket is None:
        raise ConvergenceError(f"no x-z plane crossing found within {hi_t:.3f} TU")
    t_start, y_start = grid[bracket], ys[bracket]
    ta, fa = t_start, ycomp[bracket]
    tb = grid[bracket + 1]
    for _ in range(120):
        tm = 0.5 * (ta + tb)
        ym = _flow(y_start, t_start, tm, mu, tol)[-1]
        if abs(ym[1]) < _CROSS_TOL or (tb - ta) < 1e-15 * t_hint:
            return tm - state.t
        if fa * ym[1] < 0.0:
            tb = tm
        else:
            ta, fa = tm, ym[1]
    return 0.5 * (ta + tb) - state.t


def correct_halo(state: SynodicState, sys: Cr3bpSystem, half_period_hint, tol=1e-12):
    """Differentially correct a perpendicular-crossing state to a periodic orbit.

    Holds z fixed and adjusts (x, vy) until the next plane crossing is again
    perpendicular. Returns (periodic_state, period).
    """
    mu = sys.mu
    y = state.y.copy()
    if abs(y[1]) > 1e-12 or abs(y[3]) > 1e-9 or abs(y[5]) > 1e-9:
        raise ConvergenceError("corrector seed must satisfy y = vx = vz = 0")
    y[1] = y[3] = y[5] = 0.0
    tau = half_period_hint
    for _ in range(_MAX_NEWTON):
        tau = next_plane_crossing(SynodicState.from_vector(y), sys, tau, tol)
        y_half, phi = _flow_var(y, tau, mu, tol)
        res = np.array([y_half[3], y_half[5]])
        if max(abs(res[0]), abs(res[1])) < _NEWTON_TOL:
            return SynodicState.from_vector(y, state.t), 2.0 * tau
        a_half = _kernels.accel(y_half, mu)
        ydot_half = y_half[4]
        # residual sensitivity including the crossing-time variation
        dtau = -np.array([phi[1, 0], phi[1, 4]]) / ydot_half
        jac = np.array(
            [
                [phi[3, 0] + a_half[0] * dtau[0], phi[3, 4] + a_half[0] * dtau[1]],
                [phi[5, 0] + a_half[2] * dtau[0], phi[5, 4] + a_half[2] * dtau[1]],
            ]
        )
        step = np.linalg.solve(jac, -res)
        y[0] += step[0]
        y[4] += step[1]
    raise ConvergenceError("halo differential correction did not converge")


def continue_family(member0, member1, sys: Cr3bpSystem, step, tol=1e-12):
    """One pseudo-arclength continuation step along the halo family.

    member0/member1 are (state, period) pairs of consecutive family members.
    Predicts along the secant of the free parameters u = (x, z, vy), then
    corrects perpendicular crossings with the prediction held on the
    orthogonal hyperplane. Returns the next (state, period).
    """
    mu = sys.mu
    u0 = np.array([member0[0].y[i] for i in (0, 2, 4)])
    u1 = np.array([member1[0].y[i] for i in (0, 2, 4)])
    tangent = u1 - u0
    norm = float(np.linalg.norm(tangent))
    if norm == 0.0:
        raise ConvergenceError("degenerate continuation tangent")
    tangent /= norm
    u_pred = u1 + step * tangent
    # crossing-time hint: linear extrapolation of the half period along the step
    tau = 0.5 * (member1[1] + (step / norm) * (member1[1] - member0[1]))

    y = member1[0].y.copy()
    y[0], y[2], y[4] = u_pred
    y[1] = y[3] = y[5] = 0.0
    for _ in range(_MAX_NEWTON):
        tau = next_plane_crossing(SynodicState.from_vector(y), sys, tau, tol)
        y_half, phi = _flow_var(y, tau, mu, tol)
        res = np.array(
            [
                y_half[3],
                y_half[5],
                float(tangent @ (np.array([y[0], y[2], y[4]]) - u_pred)),
            ]
        )
        if max(abs(res[0]), abs(res[1])) < _NEWTON_TOL and abs(res[2]) < _NEWTON_TOL:
            return SynodicState.from_vector(y, member1[0].t), 2.0 * tau
        a_half = _kernels.accel(y_half, mu)
        ydot_half = y_half[4]
        dtau = -phi[1, [0, 2, 4]] / ydot_half
        jac = np.vstack(
            (
                phi[3, [0, 2, 4]] + a_half[0] * dtau,
                phi[5, [0, 2, 4]] + a_half[2] * dtau,
                tangent,
            )
        )
        delta = np.linalg.solve(jac, -res)
        y[0] += delta[0]
        y[2] += delta[1]
        y[4] += delta[2]
    raise ConvergenceError("pseudo-arclength continuation step did not converge")


def resample_orbit(state: SynodicState, period, sys: Cr3bpSystem, n, tol=1e-12):
    """n states uniformly spaced in time along one period, starting at state."""
    times = state.t + period * np.arange(n) / n
    return _kernels.integrate("chief", state.y, sys.mu, times, tol, tol)
