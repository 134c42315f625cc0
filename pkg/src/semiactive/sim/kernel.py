"""Compiled closed-loop integrator.

Everything in here takes flat float arrays so numba can compile it once:

* ``veh``  = ``[m_s, m_u, c_s, k_s, k_t]``
* ``bw``   = ``[c_oa, c_ob, alpha_a, alpha_b, q, b, gamma, k_0, v_max]``
* ``ctrl`` = ``[c_sky, c_gr, c_passive, p_sky, d_sky, p_gr, d_gr]``
* ``opts`` = ``[plant_mode, actuation, accel_source, ctrl_kind, substeps]`` (ints)

Plant modes: 0 explicit (damper in the loop), 1 implicit (ideal actuator, the
hysteresis state is frozen).
Actuation: 0 inversion, 1 clamp. Acceleration source: 0 model, 1 delayed.
``substeps`` 0 selects the stiffness-based automatic count.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from ..control import actuate_kernel, desired_force_kernel
from ..damper import hysteresis_rate_kernel, required_voltage_kernel
from ..model import coupled_acc_kernel, passive_acc_kernel
from ..road import road_height_kernel

MAX_SUBSTEPS = 100_000

# command tuple layout
CMD_F_DES, CMD_F_REAL, CMD_VOLT, CMD_SAT, CMD_HELD_V, CMD_HELD_C, CMD_A_S, CMD_A_U, CMD_Z_R = range(9)
CMD_SIZE = 9


@njit(cache=True, error_model="numpy")
def derivs(y, t, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, dy):
    """Write dy/dt into ``dy``; return the force acting between the masses."""
    z_s, z_u, v_s, v_u, x = y[0], y[1], y[2], y[3], y[4]
    v_rel = v_s - v_u
    z_rel = z_s - z_u
    z_r = road_height_kernel(road_kind, road_p, road_s, t)
    m_s, m_u, c_s, k_s, k_t = veh[0], veh[1], veh[2], veh[3], veh[4]
    kind = opts[3]
    if opts[0] == 1:
        if kind == 4:
            a_s, a_u, _ = coupled_acc_kernel(
                z_s, z_u, v_s, v_u, z_r, 0.0, m_s, m_u, c_s, k_s, k_t, ctrl[3], ctrl[4], ctrl[5], ctrl[6]
            )
            f = m_s * a_s + k_s * z_rel + c_s * v_rel
        else:
            f = desired_force_kernel(kind, v_s, v_u, 0.0, 0.0, z_rel, x, ctrl, bw)
            a_s, a_u = passive_acc_kernel(z_s, z_u, v_s, v_u, z_r, f, m_s, m_u, c_s, k_s, k_t)
    else:
        if opts[1] == 1:
            f = -held_c * v_rel
        else:
            f = -(bw[0] + bw[1] * held_v) * v_rel - bw[7] * z_rel + (bw[2] + bw[3] * held_v) * x
        a_s, a_u = passive_acc_kernel(z_s, z_u, v_s, v_u, z_r, f, m_s, m_u, c_s, k_s, k_t)
    dy[0] = v_s
    dy[1] = v_u
    dy[2] = a_s
    dy[3] = a_u
    if opts[0] == 1:
        # no damper in the loop, so its hysteresis state is frozen
        dy[4] = 0.0
    else:
        dy[4] = hysteresis_rate_kernel(x, v_rel, bw[4], bw[5], bw[6])
    return f


@njit(cache=True, error_model="numpy")
def command(y, t, prev_as, prev_au, veh, bw, ctrl, opts, c_max, eps_den, road_kind, road_p, road_s, cmd, dy):
    """Control command at the start of a step, held over the whole step.

    ``dy`` is scratch space of length 5.
    """
    z_s, z_u, v_s, v_u, x = y[0], y[1], y[2], y[3], y[4]
    v_rel = v_s - v_u
    z_rel = z_s - z_u
    z_r = road_height_kernel(road_kind, road_p, road_s, t)
    kind = opts[3]
    if opts[0] == 1:
        f = derivs(y, t, veh, bw, ctrl, opts, 0.0, 0.0, road_kind, road_p, road_s, dy)
        volt, sat = required_voltage_kernel(f, v_rel, x, bw[0], bw[1], bw[2], bw[3], bw[8], eps_den)
        f_des = f
        f_real = f
        held_v = volt
        held_c = 0.0
    else:
        a_s = 0.0
        a_u = 0.0
        if kind == 4:
            if opts[2] == 0:
                a_s, a_u, _ = coupled_acc_kernel(
                    z_s, z_u, v_s, v_u, z_r, 0.0,
                    veh[0], veh[1], veh[2], veh[3], veh[4], ctrl[3], ctrl[4], ctrl[5], ctrl[6],
                )
            else:
                a_s = prev_as
                a_u = prev_au
        f_des = desired_force_kernel(kind, v_s, v_u, a_s, a_u, z_rel, x, ctrl, bw)
        volt, sat, f_real, held_c = actuate_kernel(f_des, v_rel, z_rel, x, bw, opts[1], c_max, eps_den, kind == 0)
        held_v = volt
        derivs(y, t, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, dy)
    cmd[CMD_F_DES] = f_des
    cmd[CMD_F_REAL] = f_real
    cmd[CMD_VOLT] = volt
    cmd[CMD_SAT] = 1.0 if sat else 0.0
    cmd[CMD_HELD_V] = held_v
    cmd[CMD_HELD_C] = held_c
    cmd[CMD_A_S] = dy[2]
    cmd[CMD_A_U] = dy[3]
    cmd[CMD_Z_R] = z_r


@njit(cache=True, error_model="numpy")
def substep_count(y, dt, bw, opts):
    substeps = opts[4]
    if substeps > 0:
        return substeps
    if opts[0] == 1:
        return 1
    # keep h * (q + b) * |v_rel| <= 1, inside RK4's real-axis stability interval
    rate = dt * (bw[4] + bw[5]) * abs(y[2] - y[3])
    if not rate < MAX_SUBSTEPS:
        return MAX_SUBSTEPS
    n = int(math.ceil(rate))
    return n if n > 1 else 1


@njit(cache=True, error_model="numpy")
def advance(y, t, dt, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, acc_out, work):
    """Classical RK4 over one control period with the command held.

    Overwrites ``y`` with the new state; ``acc_out`` receives the accelerations
    at the new state under the held command (what a sensor reads before the
    next update). ``work`` is a (5, 5) scratch array.
    """
    n_sub = substep_count(y, dt, bw, opts)
    h = dt / n_sub
    k1 = work[0]
    k2 = work[1]
    k3 = work[2]
    k4 = work[3]
    tmp = work[4]
    cur = y
    for j in range(n_sub):
        tj = t + j * h
        derivs(cur, tj, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, k1)
        for i in range(5):
            tmp[i] = cur[i] + 0.5 * h * k1[i]
        derivs(tmp, tj + 0.5 * h, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, k2)
        for i in range(5):
            tmp[i] = cur[i] + 0.5 * h * k2[i]
        derivs(tmp, tj + 0.5 * h, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, k3)
        for i in range(5):
            tmp[i] = cur[i] + h * k3[i]
        derivs(tmp, tj + h, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, k4)
        for i in range(5):
            cur[i] = cur[i] + (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    derivs(cur, t + dt, veh, bw, ctrl, opts, held_v, held_c, road_kind, road_p, road_s, tmp)
    acc_out[0] = tmp[2]
    acc_out[1] = tmp[3]
    acc_out[2] = n_sub


@njit(cache=True, error_model="numpy")
def all_finite(y):
    for v in y:
        if not math.isfinite(v):
            return False
    return True


@njit(cache=True, error_model="numpy")
def simulate_kernel(y0, dt, n_steps, stride, veh, bw, ctrl, opts, c_max, eps_den, road_kind, road_p, road_s, rec):
    """Run ``n_steps`` steps from ``y0``, writing every ``stride``-th sample into ``rec``.

    ``rec`` rows: ``t, z_s, z_u, v_s, v_u, x, a_s, a_u, f_desired, f_realized,
    voltage, z_r, saturated``. Returns the index of the first non-finite step,
    or -1 on success.
    """
    y = y0.copy()
    cmd = np.empty(CMD_SIZE)
    acc = np.zeros(3)
    dy = np.empty(5)
    work = np.empty((5, 5))
    prev_as = 0.0
    prev_au = 0.0
    r = 0
    for k in range(n_steps + 1):
        t = k * dt
        command(y, t, prev_as, prev_au, veh, bw, ctrl, opts, c_max, eps_den, road_kind, road_p, road_s, cmd, dy)
        if k % stride == 0:
            rec[r, 0] = t
            for i in range(5):
                rec[r, 1 + i] = y[i]
            rec[r, 6] = cmd[CMD_A_S]
            rec[r, 7] = cmd[CMD_A_U]
            rec[r, 8] = cmd[CMD_F_DES]
            rec[r, 9] = cmd[CMD_F_REAL]
            rec[r, 10] = cmd[CMD_VOLT]
            rec[r, 11] = cmd[CMD_Z_R]
            rec[r, 12] = cmd[CMD_SAT]
            r += 1
        if k == n_steps:
            break
        if not all_finite(y):
            return k
        advance(y, t, dt, veh, bw, ctrl, opts, cmd[CMD_HELD_V], cmd[CMD_HELD_C],
                road_kind, road_p, road_s, acc, work)
        if not all_finite(y):
            return k
        prev_as = acc[0]
        prev_au = acc[1]
    return -1
