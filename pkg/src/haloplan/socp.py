"""Dense primal-dual interior-point method for the maneuver-time dual program.

Solves, for a handful of 6x3 impulse maps G_j,

    maximize  w . lam   subject to  ||G_j^T lam||_2 <= 1  for all j,

written internally as the conic program min c.lam, s_j = e - A_j lam in Q4,
with c = -w, A_j = [0; G_j^T] and Q4 the second-order cone. The problem never
exceeds six variables and a few dozen cones, so a bespoke Mehrotra
predictor-corrector with Nesterov-Todd scaling and dense 6x6 normal equations
is both simpler and faster than a general-purpose solver.

Strict feasibility always holds (lam = 0), so failures are either iteration
stalls or genuine unboundedness (the target not reachable from the given
impulse maps), which is reported distinctly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InfeasibleTargetError

_MAX_ITERS = 100
_STEP_FRACTION = 0.99
_UNBOUNDED_OBJ = 1e12
_REG = 1e-12


@dataclass(frozen=True)
class SocpInfo:
    iterations: int
    gap: float
    primal_residual: float
    dual_residual: float
    objective: float  # value of w . lam at the solution


def _jnorm2(u):
    """Hyperbolic norm squared u0^2 - ||u_bar||^2 per cone, (m,) from (m, 4)."""
    return u[:, 0] ** 2 - np.sum(u[:, 1:] ** 2, axis=1)


def _jordan_mul(u, v):
    out = np.empty_like(u)
    out[:, 0] = np.sum(u * v, axis=1)
    out[:, 1:] = u[:, :1] * v[:, 1:] + v[:, :1] * u[:, 1:]
    return out


def _jordan_solve(u, d):
    """Solve u o x = d per cone (arrow-matrix solve, closed form)."""
    u0 = u[:, 0]
    ub = u[:, 1:]
    det = _jnorm2(u)
    ub_d = np.sum(ub * d[:, 1:], axis=1)
    x = np.empty_like(d)
    x[:, 0] = (u0 * d[:, 0] - ub_d) / det
    x[:, 1:] = d[:, 1:] / u0[:, None] - (x[:, 0] / u0)[:, None] * ub
    return x


def _nt_scaling(s, z):
    """Nesterov-Todd scaling point and magnitude per cone.

    Returns (wbar, eta) with wbar on the unit hyperboloid; the scaling matrix
    is W = sqrt(eta) H(wbar) and satisfies W z = W^{-1} s.
    """
    rs = np.sqrt(_jnorm2(s))
    rz = np.sqrt(_jnorm2(z))
    s_n = s / rs[:, None]
    z_n = z / rz[:, None]
    gamma = np.sqrt(0.5 * (1.0 + np.sum(s_n * z_n, axis=1)))
    jz = z_n.copy()
    jz[:, 1:] *= -1.0
    wbar = (s_n + jz) / (2.0 * gamma[:, None])
    eta = rs / rz
    return wbar, eta


def _h_apply(wbar, v):
    """Apply H(wbar) = [[w0, wb^T], [wb, I + wb wb^T / (1 + w0)]] per cone."""
    w0 = wbar[:, 0]
    wb = wbar[:, 1:]
    out = np.empty_like(v)
    wb_v = np.sum(wb * v[:, 1:], axis=1)
    out[:, 0] = w0 * v[:, 0] + wb_v
    out[:, 1:] = (
        wb * v[:, :1] + v[:, 1:] + (wb_v / (1.0 + w0))[:, None] * wb
    )
    return out


def _w_apply(wbar, eta, v):
    return np.sqrt(eta)[:, None] * _h_apply(wbar, v)


def _w_inv_apply(wbar, eta, v):
    jw = wbar.copy()
    jw[:, 1:] *= -1.0
    return _h_apply(jw, v) / np.sqrt(eta)[:, None]


def _h_matrix(wbar_j):
    w0 = wbar_j[0]
    wb = wbar_j[1:]
    h = np.empty((4, 4))
    h[0, 0] = w0
    h[0, 1:] = wb
    h[1:, 0] = wb
    h[1:, 1:] = np.eye(3) + np.outer(wb, wb) / (1.0 + w0)
    return h


def _max_cone_step(u, du):
    """Largest alpha in (0, 1] with u + alpha du in the cone, per cone minimum."""
    a = _jnorm2(du)
    b = u[:, 0] * du[:, 0] - np.sum(u[:, 1:] * du[:, 1:], axis=1)
    c = _jnorm2(u)
    alpha = np.inf
    for ai, bi, ci in zip(a, b, c):
        roots = []
        if abs(ai) < 1e-300:
            if bi < 0.0:
                roots.append(-ci / (2.0 * bi))
        else:
            disc = bi * bi - ai * ci
            if disc >= 0.0:
                sq = np.sqrt(disc)
                for r in ((-bi - sq) / ai, (-bi + sq) / ai):
                    if r > 0.0:
                        roots.append(r)
        pos = [r for r in roots if r > 0.0]
        if pos:
            alpha = min(alpha, min(pos))
    return min(1.0, alpha)


def solve_socp(g_maps, w, tol=1e-10):
    """Maximize w . lam subject to ||G_j^T lam|| <= 1 for every map in g_maps.

    g_maps: (m, 6, 3) stacked impulse-to-horizon maps. Returns (lam, SocpInfo).
    Raises InfeasibleTargetError when the objective is unbounded (w has a
    component unreachable by the maps) and ConvergenceError on a stall.
    """
    g = np.asarray(g_maps, dtype=float)
    m = g.shape[0]
    w = np.asarray(w, dtype=float)
    c = -w

    lam = np.zeros(6)
    s = np.zeros((m, 4))
    s[:, 0] = 1.0
    z = np.zeros((m, 4))
    z[:, 0] = 1.0
    e = np.zeros((m, 4))
    e[:, 0] = 1.0

    c_norm = 1.0 + float(np.linalg.norm(c))
    a_norm = float(np.sqrt(np.max(np.sum(g * g, axis=(1, 2)))))

    def a_apply(v):  # (m, 4) block results of A_j v
        out = np.empty((m, 4))
        out[:, 0] = 0.0
        out[:, 1:] = np.einsum("jik,i->jk", g, v)
        return out

    def at_apply(u):  # sum_j A_j^T u_j
        return np.einsum("jik,jk->i", g, u[:, 1:])

    best = None  # (score, lam, info)
    best_age = 0

    with np.errstate(all="ignore"):
        for it in range(1, _MAX_ITERS + 1):
            r_p = e - a_apply(lam) - s  # want zero
            r_d = -(c + at_apply(z))  # want zero
            gap = float(np.sum(s * z))
            obj = float(w @ lam)
            # residuals relative to the magnitudes of the terms composing
            # them, so rounding floors on badly scaled data do not block
            # termination
            pres = float(np.linalg.norm(r_p)) / (
                1.0 + np.sqrt(float(m)) + a_norm * float(np.linalg.norm(lam))
            )
            dres = float(np.linalg.norm(r_d)) / (
                c_norm + a_norm * float(np.linalg.norm(z))
            )
            grel = gap / (1.0 + abs(obj))
            score = max(pres, dres, grel)
            if not np.isfinite(score):
                break
            if best is None or score < best[0]:
                best = (score, lam.copy(), SocpInfo(it - 1, gap, pres, dres, obj))
                best_age = 0
            else:
                best_age += 1
            if score <= tol:
                return lam, SocpInfo(it - 1, gap, pres, dres, obj)
            if best_age >= 8:  # no progress; the endgame floor is reached
                break
            if obj > _UNBOUNDED_OBJ * c_norm or np.linalg.norm(lam) > _UNBOUNDED_OBJ:
                raise InfeasibleTargetError(
                    "dual objective unbounded: target outside the reachable span"
                )

            wbar, eta = _nt_scaling(s, z)
            lam_s = _w_apply(wbar, eta, z)
            mu = gap / m

            # normal-equations matrix N = sum_j A_j^T W^{-2} A_j (+ ridge)
            n_mat = np.zeros((6, 6))
            jw = wbar.copy()
            jw[:, 1:] *= -1.0
            for j in range(m):
                aj = np.zeros((4, 6))
                aj[1:, :] = g[j].T
                winv_aj = (_h_matrix(jw[j]) / np.sqrt(eta[j])) @ aj
                n_mat += winv_aj.T @ winv_aj
            n_mat += _REG * (1.0 + np.trace(n_mat) / 6.0) * np.eye(6)
            try:
                n_chol = np.linalg.cholesky(n_mat)
            except np.linalg.LinAlgError:
                n_mat += 1e-8 * (1.0 + np.trace(n_mat) / 6.0) * np.eye(6)
                n_chol = np.linalg.cholesky(n_mat)

            def base_solve(d_comp, r_p_in, r_d_in):
                lam_inv_d = _jordan_solve(lam_s, d_comp)
                t1 = _w_inv_apply(wbar, eta, lam_inv_d)
                t2 = _w_inv_apply(wbar, eta, _w_inv_apply(wbar, eta, r_p_in))
                rhs = r_d_in - at_apply(t1) + at_apply(t2)
                dlam = np.linalg.solve(n_chol.T, np.linalg.solve(n_chol, rhs))
                ds = r_p_in - a_apply(dlam)
                dz = t1 - t2 + _w_inv_apply(
                    wbar, eta, _w_inv_apply(wbar, eta, a_apply(dlam))
                )
                return dlam, ds, dz

            def kkt_solve(d_comp, r_p_in, r_d_in):
                dlam, ds, dz = base_solve(d_comp, r_p_in, r_d_in)
                # one pass of iterative refinement counters the endgame
                # ill-conditioning of the scaled system
                e1 = r_p_in - (a_apply(dlam) + ds)
                e2 = r_d_in - at_apply(dz)
                e3 = d_comp - _jordan_mul(
                    lam_s,
                    _w_apply(wbar, eta, dz) + _w_inv_apply(wbar, eta, ds),
                )
                c1, c2, c3 = base_solve(e3, e1, e2)
                return dlam + c1, ds + c2, dz + c3

            # predictor
            d_aff = -_jordan_mul(lam_s, lam_s)
            dlam_a, ds_a, dz_a = kkt_solve(d_aff, r_p, r_d)
            alpha_aff = min(_max_cone_step(s, ds_a), _max_cone_step(z, dz_a))
            mu_aff = (
                float(np.sum((s + alpha_aff * ds_a) * (z + alpha_aff * dz_a))) / m
            )
            sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))

            # corrector
            corr = _jordan_mul(
                _w_inv_apply(wbar, eta, ds_a), _w_apply(wbar, eta, dz_a)
            )
            d_comb = sigma * mu * e - _jordan_mul(lam_s, lam_s) - corr
            dlam, ds, dz = kkt_solve(d_comb, r_p, r_d)
            alpha = _STEP_FRACTION * min(
                1.0, _max_cone_step(s, ds), _max_cone_step(z, dz)
            )

            # keep strictly inside the cones despite rounding
            ok = False
            for _ in range(40):
                s_try = s + alpha * ds
                z_try = z + alpha * dz
                if (
                    np.all(_jnorm2(s_try) > 0.0)
                    and np.all(_jnorm2(z_try) > 0.0)
                    and np.all(s_try[:, 0] > 0.0)
                    and np.all(z_try[:, 0] > 0.0)
                ):
                    ok = True
                    break
                alpha *= 0.8
            if not ok:
                break  # boundary reached to rounding; return the best iterate
            lam = lam + alpha * dlam
            s = s_try
            z = z_try

    if best is not None and best[0] <= max(1e4 * tol, 1e-6):
        return best[1], best[2]
    raise ConvergenceError(
        f"interior-point stall: best residual score {best[0] if best else np.inf:.3e}"
    )
