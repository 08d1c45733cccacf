"""Scratch validation of core physics (not part of the deliverable)."""
import numpy as np
import haloplan as hp
from haloplan import _kernels

sys_em = hp.earth_moon()
mu = sys_em.mu
print("backend:", hp.kernel_backend)

# 1. mu oracle
gm_e, gm_m = 398600.435436, 4902.800066
print("mu stored", mu, "oracle", gm_m / (gm_e + gm_m), "diff", mu - gm_m / (gm_e + gm_m))

# 2. collinear points (moon-centered, x toward Earth): std barycentric L1~0.8369, L2~1.1557
for which in (1, 2, 3):
    x = hp.cr3bp.collinear_point(sys_em, which)
    st = hp.SynodicState([x, 0, 0], [0, 0, 0])
    a = hp.cr3bp_accel(st, sys_em)
    print(f"L{which}: x_M={x:+.6f} (bary {1-mu-x:+.6f})  |a|={np.linalg.norm(a):.2e}")

# 3. Table-1 R1 state
r1_km = np.array([-13395.0, 0.0, -70841.0])
v1_kmps = np.array([0.0, 0.1055, 0.0])
st1 = hp.nondimensionalize(hp.SynodicState(r1_km, v1_kmps), sys_em)
print("R1 nondim r", st1.r, "v", st1.v)

# effective-potential gradient oracle for accel (independent formulation)
def u_eff(r):
    rn = np.linalg.norm(r)
    re = r - np.array([1.0, 0, 0])
    ren = np.linalg.norm(re)
    return mu / rn + (1 - mu) / ren - (1 - mu) * r[0] + 0.5 * (r[0] ** 2 + r[1] ** 2)

def grad_fd(f, x, h=1e-6):
    g = np.zeros(3)
    for i in range(3):
        e = np.zeros(3); e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g

a_code = hp.cr3bp_accel(st1, sys_em)
cor = np.array([2 * st1.v[1], -2 * st1.v[0], 0.0])
a_oracle = grad_fd(u_eff, st1.r) + cor
print("accel err vs FD grad:", np.max(np.abs(a_code - a_oracle)))

# 4. LVLH kinematics vs FD of basis
def basis_at(t, st):
    st2 = hp.propagate_absolute(st, t, sys_em)
    return hp.lvlh_frame(st2, sys_em), st2

fr = hp.lvlh_frame(st1, sys_em)
print("basis orthonormality:", np.max(np.abs(fr.basis @ fr.basis.T - np.eye(3))))
print("det basis:", np.linalg.det(fr.basis))
print("k_hat vs -r_hat:", np.max(np.abs(fr.basis[2] + st1.r / np.linalg.norm(st1.r))))

d = 1e-6
frp, _ = basis_at(st1.t + d, st1)
frm, _ = basis_at(st1.t - d, st1)
bdot = (frp.basis - frm.basis) / (2 * d)
# Bdot = -Omega_{L/M} B with omega_{L/M} = omega_{L/I} - omega_{M/I} (in L comps)
om_mi_L = fr.basis @ np.array([0.0, 0.0, 1.0])
om_lm = fr.omega - om_mi_L
def skew(w):
    return np.array([[0, -w[2], w[1]], [w[2], 0, -w[0]], [-w[1], w[0], 0]])
resid = bdot + skew(om_lm) @ fr.basis
print("Bdot + Omega_LM B residual:", np.max(np.abs(resid)), "scale", np.max(np.abs(bdot)))

# omega via FD directly: omega_L/M from Bdot: Omega = -Bdot B^T
om_lm_fd = -bdot @ fr.basis.T
w_fd = np.array([om_lm_fd[2, 1], om_lm_fd[0, 2], om_lm_fd[1, 0]])
print("omega_LM analytic", om_lm, "fd", w_fd)

# omega_dot via FD of omega (L components)
wp = frp.omega; wm = frm.omega
wdot_fd = (wp - wm) / (2 * d)
print("omega_dot analytic", fr.omega_dot, "fd", wdot_fd, "rel err",
      np.max(np.abs(fr.omega_dot - wdot_fd)) / max(np.max(np.abs(wdot_fd)), 1e-30))

# 5. plant matrix vs FD Jacobian of independent nonlinear relative dynamics
def rel_accel_nonlinear(rho_L, rhodot_L, st, frame):
    """Independent: full two-primary relative acceleration in LVLH components."""
    B = frame.basis
    r_c = st.r
    rho_M = B.T @ rho_L
    r_d = r_c + rho_M
    def grav(r):
        rn = np.linalg.norm(r)
        re = r - np.array([1.0, 0, 0])
        ren = np.linalg.norm(re)
        return -mu * r / rn**3 - (1 - mu) * re / ren**3
    da_M = grav(r_d) - grav(r_c)
    da_L = B @ da_M
    om = frame.omega; omd = frame.omega_dot
    return (da_L - 2 * np.cross(om, rhodot_L) - np.cross(omd, rho_L)
            - np.cross(om, np.cross(om, rho_L)))

A = hp.plant_matrix(st1, sys_em).a
J = np.zeros((3, 3))
h = 1e-6
for i in range(3):
    e = np.zeros(3); e[i] = h
    ap = rel_accel_nonlinear(e, np.zeros(3), st1, fr)
    am = rel_accel_nonlinear(-e, np.zeros(3), st1, fr)
    J[:, i] = (ap - am) / (2 * h)
A_ll = A[3:, :3]
print("A_ll vs FD Jacobian rel err:", np.linalg.norm(A_ll - J) / np.linalg.norm(J))
print("A_ll:\n", A_ll)

# velocity block: -2 Omega check vs FD in rhodot
Jv = np.zeros((3, 3))
for i in range(3):
    e = np.zeros(3); e[i] = h
    ap = rel_accel_nonlinear(np.zeros(3), e, st1, fr)
    am = rel_accel_nonlinear(np.zeros(3), -e, st1, fr)
    Jv[:, i] = (ap - am) / (2 * h)
print("A_lv vs -2Omega rel err:", np.linalg.norm(A[3:, 3:] - Jv) / max(np.linalg.norm(Jv), 1e-30))

# 6. propagate R1 roughly one 9:2 period (~1.5112 TU) and check closeness
t_syn = 29.530589 * 86400.0 / sys_em.tu_s
P_target = 2 * t_syn / 9
print("synodic month TU:", t_syn, "P(9:2) target:", P_target)
stP = hp.propagate_absolute(st1, P_target, sys_em)
print("return gap DU:", np.linalg.norm(stP.r - st1.r), "=", sys_em.du_to_km(np.linalg.norm(stP.r - st1.r)), "km")

# Jacobi conservation over 4pi
import time
t0 = time.time()
st4 = hp.propagate_absolute(st1, 4 * np.pi, sys_em)
print("4pi propagation wall:", time.time() - t0, "s")
print("Jacobi drift:", abs(hp.jacobi_constant(st4, sys_em) - hp.jacobi_constant(st1, sys_em)))

# forward-backward reversibility
stf = hp.propagate_absolute(st1, 0.5, sys_em)
stb = hp.propagate_absolute(stf, 0.0, sys_em)
print("fwd-back gap DU:", np.linalg.norm(stb.r - st1.r))
