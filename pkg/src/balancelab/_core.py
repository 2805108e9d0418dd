"""Jitted numerical core: kinematics, contact, one physics step, LLC windows.

Everything here operates on plain float64 arrays so numba can compile it; the
public modules wrap these kernels with the dataclass API.  This is the only
implementation of the dynamics (no separate slow path), so every test exercises
the same arithmetic that training runs.

Contact rows are (active, normal, tangential, penetration, anchor_x) per point,
heel first; anchor_x is NaN while airborne.
"""

from __future__ import annotations

import numpy as np
from numba import njit

N_COORDS = 7
N_LINKS = 5


@njit(cache=True)
def kinematics_core(q, qd, lengths, com_u, com_v):
    """Absolute link pitch/rate, angle pivots, link COM positions/velocities."""
    theta = np.empty(N_LINKS)
    omega = np.empty(N_LINKS)
    theta[0] = q[2]
    omega[0] = qd[2]
    for i in range(1, N_LINKS):
        theta[i] = theta[i - 1] + q[2 + i]
        omega[i] = omega[i - 1] + qd[2 + i]

    pivots = np.empty((N_LINKS, 2))
    pivots[0, 0] = q[0]
    pivots[0, 1] = q[1]
    pivots[1, 0] = q[0]
    pivots[1, 1] = q[1]
    for i in range(1, N_LINKS - 1):
        # segment carried by link i spans joint i to joint i+1
        pivots[i + 1, 0] = pivots[i, 0] - lengths[i] * np.sin(theta[i])
        pivots[i + 1, 1] = pivots[i, 1] + lengths[i] * np.cos(theta[i])

    coms = np.empty((N_LINKS, 2))
    vcoms = np.empty((N_LINKS, 2))
    for i in range(N_LINKS):
        c = np.cos(theta[i])
        s = np.sin(theta[i])
        coms[i, 0] = pivots[i, 0] + com_u[i] * c - com_v[i] * s
        coms[i, 1] = pivots[i, 1] + com_u[i] * s + com_v[i] * c
        vx = qd[0]
        vz = qd[1]
        for k in range(i + 1):
            dx = coms[i, 0] - pivots[k, 0]
            dz = coms[i, 1] - pivots[k, 1]
            vx += qd[2 + k] * (-dz)
            vz += qd[2 + k] * dx
        vcoms[i, 0] = vx
        vcoms[i, 1] = vz
    return theta, omega, pivots, coms, vcoms


@njit(cache=True)
def step_core(q, qd, t, contact, torques, push_force,
              masses, inertias, lengths, com_u, com_v, armature,
              angle_lo, angle_hi, torque_lim,
              g, mu, kn, cn, kt, ct, heel_x, toe_x, hf,
              dt, enable_contact):
    """One semi-implicit Euler step.  Returns (q2, qd2, contact2, ok)."""
    theta, omega, pivots, coms, vcoms = kinematics_core(q, qd, lengths, com_u, com_v)

    # Centripetal COM acceleration at qdd = 0: chain segments plus COM offset,
    # each rotating at the absolute rate of its link.
    cent = np.zeros((N_LINKS, 2))
    px = 0.0
    pz = 0.0
    for i in range(N_LINKS):
        if i >= 2:
            w2 = omega[i - 1] * omega[i - 1]
            px += w2 * (pivots[i, 0] - pivots[i - 1, 0])
            pz += w2 * (pivots[i, 1] - pivots[i - 1, 1])
        w2 = omega[i] * omega[i]
        cent[i, 0] = -(px + w2 * (coms[i, 0] - pivots[i, 0]))
        cent[i, 1] = -(pz + w2 * (coms[i, 1] - pivots[i, 1]))

    mass_mat = np.zeros((N_COORDS, N_COORDS))
    rhs = np.zeros(N_COORDS)
    jx = np.empty(N_COORDS)
    jz = np.empty(N_COORDS)
    for i in range(N_LINKS):
        for k in range(N_COORDS):
            jx[k] = 0.0
            jz[k] = 0.0
        jx[0] = 1.0
        jz[1] = 1.0
        for k in range(i + 1):
            dx = coms[i, 0] - pivots[k, 0]
            dz = coms[i, 1] - pivots[k, 1]
            jx[2 + k] = -dz
            jz[2 + k] = dx
        m = masses[i]
        fx = -m * cent[i, 0]
        fz = -m * (cent[i, 1] + g)
        for a in range(N_COORDS):
            rhs[a] += jx[a] * fx + jz[a] * fz
            for b in range(a, N_COORDS):
                mass_mat[a, b] += m * (jx[a] * jx[b] + jz[a] * jz[b])
        for a in range(i + 1):
            for b in range(a, i + 1):
                mass_mat[2 + a, 2 + b] += inertias[i]
    for a in range(N_COORDS):
        for b in range(a + 1, N_COORDS):
            mass_mat[b, a] = mass_mat[a, b]
    for j in range(4):
        mass_mat[3 + j, 3 + j] += armature[j]

    for j in range(4):
        u = torques[j]
        if u > torque_lim[j]:
            u = torque_lim[j]
        elif u < -torque_lim[j]:
            u = -torque_lim[j]
        rhs[3 + j] += u

    contact2 = np.zeros((2, 5))
    contact2[0, 4] = np.nan
    contact2[1, 4] = np.nan
    if enable_contact:
        cth = np.cos(q[2])
        sth = np.sin(q[2])
        for ci in range(2):
            dxf = heel_x if ci == 0 else toe_x
            relx = dxf * cth + hf * sth
            relz = dxf * sth - hf * cth
            posx = q[0] + relx
            posz = q[1] + relz
            pen = -posz
            if pen <= 0.0:
                continue
            velx = qd[0] + qd[2] * (-relz)
            velz = qd[1] + qd[2] * relx
            fn = kn * pen - cn * velz
            if fn < 0.0:
                fn = 0.0
            anchor = contact[ci, 4]
            if np.isnan(anchor):
                anchor = posx
            ft = -kt * (posx - anchor) - ct * velx
            lim = mu * fn
            if ft > lim:
                ft = lim
                anchor = posx + (ft + ct * velx) / kt
            elif ft < -lim:
                ft = -lim
                anchor = posx + (ft + ct * velx) / kt
            contact2[ci, 0] = 1.0
            contact2[ci, 1] = fn
            contact2[ci, 2] = ft
            contact2[ci, 3] = pen
            contact2[ci, 4] = anchor
            rhs[0] += ft
            rhs[1] += fn
            rhs[2] += relx * fn - relz * ft

    if push_force != 0.0:
        # horizontal pulse at the pelvis COM (link 3)
        for k in range(N_COORDS):
            jx[k] = 0.0
        jx[0] = 1.0
        for k in range(4):
            jx[2 + k] = -(coms[3, 1] - pivots[k, 1])
        for a in range(N_COORDS):
            rhs[a] += push_force * jx[a]

    qdd = np.linalg.solve(mass_mat, rhs)
    qd2 = qd + dt * qdd
    q2 = q + dt * qd2

    for j in range(4):
        if q2[3 + j] < angle_lo[j]:
            q2[3 + j] = angle_lo[j]
            if qd2[3 + j] < 0.0:
                qd2[3 + j] = 0.0
        elif q2[3 + j] > angle_hi[j]:
            q2[3 + j] = angle_hi[j]
            if qd2[3 + j] > 0.0:
                qd2[3 + j] = 0.0

    ok = True
    for k in range(N_COORDS):
        if not (np.isfinite(q2[k]) and np.isfinite(qd2[k])):
            ok = False
    return q2, qd2, contact2, ok


@njit(cache=True)
def biquad_step(coef, state, ch, x):
    """One DF2 step of channel `ch`; coef rows are (gain, d1, d2)."""
    w0 = coef[ch, 1] * state[ch, 0] + coef[ch, 2] * state[ch, 1] + x
    y = coef[ch, 0] * (w0 + 2.0 * state[ch, 0] + state[ch, 1])
    state[ch, 1] = state[ch, 0]
    state[ch, 0] = w0
    return y


@njit(cache=True)
def first_order_step(coef, state, ch, x):
    """One first-order low-pass step; coef rows are (gain, d)."""
    w0 = coef[ch, 1] * state[ch] + x
    y = coef[ch, 0] * (w0 + state[ch])
    state[ch] = w0
    return y


@njit(cache=True)
def llc_window_core(q, qd, t, contact, target, kp, kd,
                    pos_coef, pos_state, vel_coef, vel_state,
                    push_force, push_start, push_duration,
                    n_steps, pd_every, log, total_mass,
                    masses, inertias, lengths, com_u, com_v, armature,
                    angle_lo, angle_hi, torque_lim,
                    g, mu, kn, cn, kt, ct, heel_x, toe_x, hf, dt):
    """Run n_steps of filtered PD + physics holding `target` fixed.

    The PD loop (and its feedback filters) run every `pd_every` physics steps;
    mutates the filter states in place.  When `log` is non-empty it receives one
    row per physics step:
      (t, ankle_ref, ankle_meas, foot/pelvis/torso pitch, their rates,
       capture_x, com_x, com_z, u_ankle/knee/hip/waist, heel_flag, toe_flag).
    Returns (q, qd, t, contact, ok, steps_done).
    """
    u = np.zeros(4)
    want_log = log.shape[0] >= n_steps
    ok = True
    steps_done = 0
    for step_i in range(n_steps):
        if step_i % pd_every == 0:
            for j in range(4):
                qf = biquad_step(pos_coef, pos_state, j, q[3 + j])
                qdf = first_order_step(vel_coef, vel_state, j, qd[3 + j])
                u[j] = kp[j] * (target[j] - qf) - kd[j] * qdf
                if u[j] > torque_lim[j]:
                    u[j] = torque_lim[j]
                elif u[j] < -torque_lim[j]:
                    u[j] = -torque_lim[j]
        pf = push_force if (push_start <= t < push_start + push_duration) else 0.0
        q, qd, contact, ok = step_core(
            q, qd, t, contact, u, pf,
            masses, inertias, lengths, com_u, com_v, armature,
            angle_lo, angle_hi, torque_lim,
            g, mu, kn, cn, kt, ct, heel_x, toe_x, hf, dt, True)
        t += dt
        if not ok:
            break
        steps_done += 1
        if want_log:
            theta, omega, pivots, coms, vcoms = kinematics_core(
                q, qd, lengths, com_u, com_v)
            cx = 0.0
            cz = 0.0
            cvx = 0.0
            for i in range(N_LINKS):
                cx += masses[i] * coms[i, 0]
                cz += masses[i] * coms[i, 1]
                cvx += masses[i] * vcoms[i, 0]
            cx /= total_mass
            cz /= total_mass
            cvx /= total_mass
            row = log[step_i]
            row[0] = t
            row[1] = target[0]
            row[2] = q[3]
            row[3] = theta[0]
            row[4] = theta[3]
            row[5] = theta[4]
            row[6] = omega[0]
            row[7] = omega[3]
            row[8] = omega[4]
            row[9] = cx + cvx * np.sqrt(cz / g) if cz > 0.0 else cx
            row[10] = cx
            row[11] = cz
            row[12] = u[0]
            row[13] = u[1]
            row[14] = u[2]
            row[15] = u[3]
            row[16] = contact[0, 0]
            row[17] = contact[1, 0]
    return q, qd, t, contact, ok, steps_done
