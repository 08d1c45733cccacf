"""Pure NumPy implementation of the numerical kernels.

Mirrors the compiled core in ``haloplan._kernels._core``; both backends run
the same algorithms (Dormand-Prince 5(4) with identical step control, Pade-13
scaling-and-squaring matrix exponential) so their results agree to
integration tolerance. This module is the fallback selected at import time
when the extension is unavailable.

Frame convention: moon-centered synodic frame, x toward the Earth, z along
the Earth-Moon angular momentum, rotation rate one in nondimensional units.
"""

import numpy as np

from ..errors import DegenerateFrameError, IntegrationError, SingularityError

BACKEND = "pure"

SINGULARITY_DU = 1e-9
DEGENERATE_H = 1e-12

_R_EM = np.array([1.0, 0.0, 0.0])  # Earth relative to the Moon
_R_EM_RATE = np.array([0.0, 1.0, 0.0])  # inertial rate of r_em (z_hat x r_em)
_EYE3 = np.eye(3)


def _primary_distances(r):
    rn = float(np.sqrt(r @ r))
    re = r - _R_EM
    ren = float(np.sqrt(re @ re))
    if rn < SINGULARITY_DU or ren < SINGULARITY_DU:
        raise SingularityError(
            f"state within {SINGULARITY_DU:g} DU of a primary "
            f"(moon {rn:.3e} DU, earth {ren:.3e} DU)"
        )
    return rn, re, ren


def _grav_inertial(r, mu, rn, re, ren):
    # Inertial acceleration of a point at r relative to the (accelerating) Moon:
    # both primaries plus the indirect term from the Moon's own orbit.
    return -(mu / rn**3) * r - (1.0 - mu) * (re / ren**3 + _R_EM)


def accel(y, mu):
    """Synodic-frame acceleration: gravity of both primaries plus frame terms."""
    r = y[:3]
    v = y[3:6]
    rn, re, ren = _primary_distances(r)
    a = _grav_inertial(r, mu, rn, re, ren)
    a[0] += 2.0 * v[1] + r[0]
    a[1] += -2.0 * v[0] + r[1]
    return a


def lvlh_kinematics(y, mu):
    """LVLH basis (rows i, j, k in synodic coordinates) plus omega, omega_dot.

    omega is the frame's inertial angular velocity expressed in LVLH axes;
    its x component vanishes identically for this frame definition. omega_dot
    is the LVLH-frame derivative of omega, computed analytically from the
    chief's acceleration and jerk along the flow.
    """
    r = y[:3]
    v = y[3:6]
    rn, re, ren = _primary_distances(r)
    v_i = v + np.array([-r[1], r[0], 0.0])
    h_vec = np.cross(r, v_i)
    hn = float(np.sqrt(h_vec @ h_vec))
    if hn < DEGENERATE_H:
        raise DegenerateFrameError(
            f"chief angular momentum {hn:.3e} too small for an LVLH frame"
        )
    k_hat = -r / rn
    j_hat = -h_vec / hn
    i_hat = np.cross(j_hat, k_hat)
    basis = np.vstack((i_hat, j_hat, k_hat))

    a_i = _grav_inertial(r, mu, rn, re, ren)
    a_l = basis @ a_i
    ax, ay = float(a_l[0]), float(a_l[1])
    vz = float(k_hat @ v_i)
    w_y = -hn / rn**2
    w_z = rn * ay / hn
    omega = np.array([0.0, w_y, w_z])

    # Jerk of the chief in inertial axes; the Earth direction rotates with the
    # synodic frame, hence the _R_EM_RATE contributions.
    v_ie = v_i - _R_EM_RATE
    jerk_i = (
        -mu * (v_i / rn**3 - 3.0 * r * float(r @ v_i) / rn**5)
        - (1.0 - mu) * (v_ie / ren**3 - 3.0 * re * float(re @ v_ie) / ren**5)
        - (1.0 - mu) * _R_EM_RATE
    )
    jay = float(j_hat @ jerk_i)
    h_dot = rn * ax
    ay_dot = -w_z * ax + jay
    wy_dot = -ax / rn - 2.0 * hn * vz / rn**3
    wz_dot = (-vz * ay + rn * ay_dot) / hn - rn * ay * h_dot / hn**2
    omega_dot = np.array([0.0, wy_dot, wz_dot])
    return basis, omega, omega_dot


def _skew(w):
    return np.array(
        [
            [0.0, -w[2], w[1]],
            [w[2], 0.0, -w[0]],
            [-w[1], w[0], 0.0],
        ]
    )


def plant_matrix(y, mu):
    """Instantaneous plant matrix of the linearized LVLH relative dynamics."""
    r = y[:3]
    rn, re, ren = _primary_distances(r)
    basis, omega, omega_dot = lvlh_kinematics(y, mu)
    r_l = basis @ r
    re_l = basis @ re
    tide_moon = -(mu / rn**3) * (_EYE3 - 3.0 * np.outer(r_l, r_l) / rn**2)
    tide_earth = -((1.0 - mu) / ren**3) * (_EYE3 - 3.0 * np.outer(re_l, re_l) / ren**2)
    om = _skew(omega)
    omd = _skew(omega_dot)
    a = np.zeros((6, 6))
    a[:3, 3:] = _EYE3
    a[3:, :3] = -omd - om @ om + tide_moon + tide_earth
    a[3:, 3:] = -2.0 * om
    return a


# -- matrix exponential ------------------------------------------------------

_PADE13 = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
_THETA13 = 4.25


def expm66(a):
    """exp(a) by Pade-13 with norm-based scaling and squaring."""
    a = np.asarray(a, dtype=float)
    nrm = float(np.abs(a).sum(axis=0).max())
    if not np.isfinite(nrm):
        raise OverflowError("matrix exponential input is not finite")
    s = 0
    if nrm > _THETA13:
        s = int(np.ceil(np.log2(nrm / _THETA13)))
        if s > 1023:
            raise OverflowError(f"matrix exponential overflow: scaled norm {nrm:.3e}")
        a = a * (0.5**s)
    b = _PADE13
    eye = np.eye(a.shape[0])
    a2 = a @ a
    a4 = a2 @ a2
    a6 = a2 @ a4
    u = a @ (
        a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
        + b[7] * a6
        + b[5] * a4
        + b[3] * a2
        + b[1] * eye
    )
    v = (
        a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
        + b[6] * a6
        + b[4] * a4
        + b[2] * a2
        + b[0] * eye
    )
    x = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        x = x @ x
    if not np.all(np.isfinite(x)):
        raise OverflowError("matrix exponential overflowed during squaring")
    return x


# -- Dormand-Prince 5(4) ------------------------------------------------------

_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0)
_A_STAGES = (
    np.array([0.2]),
    np.array([3.0 / 40.0, 9.0 / 40.0]),
    np.array([44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0]),
    np.array([19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0]),
    np.array(
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0]
    ),
    np.array([35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0]),
)
_ERR = np.array(
    [
        35.0 / 384.0 - 5179.0 / 57600.0,
        0.0,
        500.0 / 1113.0 - 7571.0 / 16695.0,
        125.0 / 192.0 - 393.0 / 640.0,
        -2187.0 / 6784.0 + 92097.0 / 339200.0,
        11.0 / 84.0 - 187.0 / 2100.0,
        -1.0 / 40.0,
    ]
)
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


def _rhs_chief(y, mu, out):
    out[:3] = y[3:6]
    out[3:6] = accel(y, mu)


def _rhs_chief_deputy(y, mu, out):
    out[:3] = y[3:6]
    out[3:6] = accel(y, mu)
    a = plant_matrix(y[:6], mu)
    out[6:12] = a @ y[6:12]


def abs_jacobian(y, mu):
    """Jacobian of the synodic-frame equations of motion (absolute flow)."""
    r = y[:3]
    rn, re, ren = _primary_distances(r)
    g = -(mu / rn**3) * (_EYE3 - 3.0 * np.outer(r, r) / rn**2)
    g = g - ((1.0 - mu) / ren**3) * (_EYE3 - 3.0 * np.outer(re, re) / ren**2)
    g[0, 0] += 1.0
    g[1, 1] += 1.0
    j = np.zeros((6, 6))
    j[:3, 3:] = _EYE3
    j[3:, :3] = g
    j[3, 4] = 2.0
    j[4, 3] = -2.0
    return j


def _rhs_var_abs(y, mu, out):
    out[:3] = y[3:6]
    out[3:6] = accel(y, mu)
    j = abs_jacobian(y, mu)
    out[6:42] = (j @ y[6:42].reshape(6, 6)).ravel()


def _rhs_var_forward(y, mu, out):
    out[:3] = y[3:6]
    out[3:6] = accel(y, mu)
    a = plant_matrix(y[:6], mu)
    out[6:42] = (a @ y[6:42].reshape(6, 6)).ravel()


def _rhs_var_backward(y, mu, out):
    out[:3] = y[3:6]
    out[3:6] = accel(y, mu)
    a = plant_matrix(y[:6], mu)
    out[6:42] = -(y[6:42].reshape(6, 6) @ a).ravel()


_RHS = {
    "chief": (_rhs_chief, 6),
    "chief_deputy": (_rhs_chief_deputy, 12),
    "var_forward": (_rhs_var_forward, 42),
    "var_backward": (_rhs_var_backward, 42),
    "var_abs": (_rhs_var_abs, 42),
}


def integrate(mode, y0, mu, times, rtol, atol):
    """Adaptive DP54 integration, outputting the state at each entry of times.

    times must be monotonic (increasing or decreasing) and start at the epoch
    of y0. Steps are clamped to the output epochs, so no interpolation is
    involved; the step-size proposal survives across clamped steps.
    """
    rhs, dim = _RHS[mode]
    y0 = np.asarray(y0, dtype=float)
    if y0.shape[0] != dim:
        raise ValueError(f"mode {mode} expects state of size {dim}, got {y0.shape[0]}")
    times = np.asarray(times, dtype=float)
    n_out = times.shape[0]
    out = np.empty((n_out, dim))
    out[0] = y0
    if n_out == 1:
        return out

    span = abs(times[-1] - times[0])
    if span == 0.0:
        out[:] = y0
        return out
    direction = 1.0 if times[-1] > times[0] else -1.0
    dts = np.diff(times) * direction
    if np.any(dts < 0.0):
        raise ValueError("output times must be monotonic")
    h_min = 1e-14 * max(span, 1.0)

    t = times[0]
    y = y0.copy()
    k = np.empty((7, dim))
    rhs(y, mu, k[0])
    h = direction * min(span, 0.05)

    for i_out in range(1, n_out):
        t_target = times[i_out]
        while direction * (t_target - t) > 0.0:
            clamped = False
            h_step = h
            # stretch up to 1% to land exactly on the output epoch
            if direction * (t + 1.01 * h_step - t_target) >= 0.0:
                h_step = t_target - t
                clamped = True
            y_stage = np.empty(dim)
            for s in range(6):
                np.matmul(_A_STAGES[s], k[: s + 1], out=y_stage)
                y_stage *= h_step
                y_stage += y
                rhs(y_stage, mu, k[s + 1])
            y_new = y_stage  # stage 6 uses the b-row of the tableau
            err_vec = h_step * (_ERR @ k)
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))
            if np.isfinite(err) and err <= 1.0:
                t = t_target if clamped else t + h_step
                y = y_new.copy()
                k[0] = k[6]
                if not clamped:
                    if err == 0.0:
                        factor = _MAX_FACTOR
                    else:
                        factor = min(
                            _MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err**-0.2)
                        )
                    h = h_step * factor
            else:
                if np.isfinite(err):
                    factor = max(_MIN_FACTOR, _SAFETY * err**-0.2)
                else:
                    factor = _MIN_FACTOR
                h = h_step * factor
                if abs(h) < h_min:
                    raise IntegrationError(
                        f"step size underflow at t={t:.6f} (|h|={abs(h):.3e})"
                    )
        out[i_out] = y
    return out
