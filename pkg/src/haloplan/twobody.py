"""Keplerian machinery for the two-body relative-motion baselines.

Native frame here is radial/tangential/normal (RTN) of the osculating orbit;
the public STM builders in stm.py permute to the library's LVLH convention.
Closed-form solutions only: Hill-Clohessy-Wiltshire for circular reference
orbits and the Yamanaka-Ankersen transition for arbitrary eccentricity, with
time handled through Kepler's equation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import HaloplanError

KEPLER_TOL = 1e-12


@dataclass(frozen=True)
class OsculatingElements:
    """Shape and phase of the osculating orbit about the central body.

    Orientation is deliberately absent: the relative-motion baselines live in
    the chief's RTN axes, which the caller identifies by permutation.
    """

    gm: float
    a: float
    e: float
    p: float
    h: float
    n_mean: float
    theta0: float  # true anomaly at t_epoch
    m0: float  # mean anomaly at t_epoch
    t_epoch: float

    @classmethod
    def from_rv(cls, r, v_inertial, gm, t_epoch=0.0):
        r = np.asarray(r, dtype=float)
        v = np.asarray(v_inertial, dtype=float)
        rn = float(np.linalg.norm(r))
        h_vec = np.cross(r, v)
        h = float(np.linalg.norm(h_vec))
        if h <= 0.0:
            raise HaloplanError("degenerate osculating orbit: zero angular momentum")
        energy = 0.5 * float(v @ v) - gm / rn
        if energy >= 0.0:
            raise HaloplanError(
                f"osculating orbit is not elliptic (specific energy {energy:.3e} >= 0)"
            )
        a = -gm / (2.0 * energy)
        e_vec = np.cross(v, h_vec) / gm - r / rn
        e = float(np.linalg.norm(e_vec))
        if e >= 1.0:
            raise HaloplanError(f"osculating eccentricity {e:.6f} >= 1")
        p = h * h / gm
        n_mean = math.sqrt(gm / a**3)
        h_hat = h_vec / h
        if e < 1e-12:
            e_hat = r / rn  # periapsis direction is arbitrary at e ~ 0
        else:
            e_hat = e_vec / e
        cos_th = float(e_hat @ r) / rn
        sin_th = float(np.cross(e_hat, r / rn) @ h_hat)
        theta0 = math.atan2(sin_th, cos_th)
        ecc0 = _eccentric_from_true(theta0, e)
        m0 = ecc0 - e * math.sin(ecc0)
        return cls(gm, a, e, p, h, n_mean, theta0, m0, t_epoch)


def _eccentric_from_true(theta, e):
    sin_e = math.sqrt(1.0 - e * e) * math.sin(theta) / (1.0 + e * math.cos(theta))
    cos_e = (e + math.cos(theta)) / (1.0 + e * math.cos(theta))
    ecc = math.atan2(sin_e, cos_e)
    # keep E on the same revolution as theta (|E - theta| < pi always)
    return ecc + 2.0 * math.pi * round((theta - ecc) / (2.0 * math.pi))


def _true_from_eccentric(ecc, e):
    sin_th = math.sqrt(1.0 - e * e) * math.sin(ecc) / (1.0 - e * math.cos(ecc))
    cos_th = (math.cos(ecc) - e) / (1.0 - e * math.cos(ecc))
    theta = math.atan2(sin_th, cos_th)
    return theta + 2.0 * math.pi * round((ecc - theta) / (2.0 * math.pi))


def solve_kepler(m, e, tol=KEPLER_TOL):
    """Eccentric anomaly from mean anomaly, safeguarded Newton iteration."""
    # reduce to the principal revolution, solve there, restore
    rev = math.floor((m + math.pi) / (2.0 * math.pi))
    m_red = m - 2.0 * math.pi * rev
    ecc = m_red + 0.85 * e * (1.0 if math.sin(m_red) >= 0.0 else -1.0)
    lo, hi = m_red - e, m_red + e
    for _ in range(80):
        f = ecc - e * math.sin(ecc) - m_red
        if abs(f) < tol:
            break
        fp = 1.0 - e * math.cos(ecc)
        step = f / fp
        nxt = ecc - step
        if nxt <= lo or nxt >= hi:  # bisect when Newton leaves the bracket
            if f > 0.0:
                hi = ecc
            else:
                lo = ecc
            nxt = 0.5 * (lo + hi)
        else:
            if f > 0.0:
                hi = ecc
            else:
                lo = ecc
        ecc = nxt
    return ecc + 2.0 * math.pi * rev


def true_anomaly_at(el: OsculatingElements, t):
    """True anomaly at epoch t, continuous across revolutions."""
    m = el.m0 + el.n_mean * (t - el.t_epoch)
    ecc = solve_kepler(m, el.e)
    return _true_from_eccentric(ecc, el.e)


# -- Hill-Clohessy-Wiltshire ---------------------------------------------------

def hcw_stm_rtn(n, dt):
    """Closed-form HCW transition over dt, RTN ordering (radial, along, cross)."""
    if n <= 0.0:
        raise HaloplanError(f"mean motion must be positive, got {n}")
    c = math.cos(n * dt)
    s = math.sin(n * dt)
    nt = n * dt
    phi = np.zeros((6, 6))
    phi[0, :] = (4.0 - 3.0 * c, 0.0, 0.0, s / n, 2.0 * (1.0 - c) / n, 0.0)
    phi[1, :] = (
        6.0 * (s - nt),
        1.0,
        0.0,
        2.0 * (c - 1.0) / n,
        (4.0 * s - 3.0 * nt) / n,
        0.0,
    )
    phi[2, :] = (0.0, 0.0, c, 0.0, 0.0, s / n)
    phi[3, :] = (3.0 * n * s, 0.0, 0.0, c, 2.0 * s, 0.0)
    phi[4, :] = (6.0 * n * (c - 1.0), 0.0, 0.0, -2.0 * s, 4.0 * c - 3.0, 0.0)
    phi[5, :] = (0.0, 0.0, -n * s, 0.0, 0.0, c)
    return phi


# -- Yamanaka-Ankersen ----------------------------------------------------------

def _ya_inplane_fundamental(theta, e, j_int):
    """Fundamental matrix of the transformed in-plane equations.

    State ordering (x_bar, y_bar, x_bar', y_bar'); j_int is the integral of
    1/rho^2 from the fixed reference anomaly to theta.
    """
    rho = 1.0 + e * math.cos(theta)
    s = rho * math.sin(theta)
    c = rho * math.cos(theta)
    sp = math.cos(theta) + e * math.cos(2.0 * theta)
    cp = -(math.sin(theta) + e * math.sin(2.0 * theta))
    one = 1.0 + 1.0 / rho
    psi = np.array(
        [
            [s, c, 2.0 - 3.0 * e * s * j_int, 0.0],
            [c * one, -s * one, -3.0 * rho**2 * j_int, 1.0],
            [sp, cp, -3.0 * e * (sp * j_int + s / rho**2), 0.0],
            [-2.0 * s, e - 2.0 * c, -3.0 + 6.0 * e * s * j_int, 0.0],
        ]
    )
    return psi


def _ya_transform(el, theta):
    """Physical RTN state -> transformed state, and its inverse, at theta."""
    rho = 1.0 + el.e * math.cos(theta)
    n2h = el.gm**2 / el.h**3
    fwd_vv = 1.0 / (n2h * rho)
    t_fwd = np.zeros((6, 6))
    t_inv = np.zeros((6, 6))
    for i in range(3):
        t_fwd[i, i] = rho
        t_fwd[3 + i, i] = -el.e * math.sin(theta)
        t_fwd[3 + i, 3 + i] = fwd_vv
        t_inv[i, i] = 1.0 / rho
        t_inv[3 + i, i] = n2h * el.e * math.sin(theta)
        t_inv[3 + i, 3 + i] = n2h * rho
    return t_fwd, t_inv


_IP = (0, 1, 3, 4)  # physical indices participating in the in-plane block


def ya_stm_rtn(el: OsculatingElements, t_from, t_to):
    """Yamanaka-Ankersen transition from t_from to t_to, RTN ordering."""
    th1 = true_anomaly_at(el, t_from)
    th2 = true_anomaly_at(el, t_to)
    n2h = el.gm**2 / el.h**3
    j1 = n2h * (t_from - el.t_epoch)
    j2 = n2h * (t_to - el.t_epoch)
    psi2 = _ya_inplane_fundamental(th2, el.e, j2)
    psi1 = _ya_inplane_fundamental(th1, el.e, j1)
    phi_ip = psi2 @ np.linalg.inv(psi1)
    d = th2 - th1
    phi_op = np.array([[math.cos(d), math.sin(d)], [-math.sin(d), math.cos(d)]])

    # assemble in transformed coordinates, then undo the YA transformation
    phi_bar = np.zeros((6, 6))
    order = (0, 1, 3, 4)  # (x_bar, y_bar, x_bar', y_bar') -> physical slots
    for a, ia in enumerate(order):
        for b, ib in enumerate(order):
            phi_bar[ia, ib] = phi_ip[a, b]
    phi_bar[2, 2] = phi_op[0, 0]
    phi_bar[2, 5] = phi_op[0, 1]
    phi_bar[5, 2] = phi_op[1, 0]
    phi_bar[5, 5] = phi_op[1, 1]

    t1_fwd, _ = _ya_transform(el, th1)
    _, t2_inv = _ya_transform(el, th2)
    return t2_inv @ phi_bar @ t1_fwd
