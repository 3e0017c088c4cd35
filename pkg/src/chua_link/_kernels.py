"""Compiled RK4 loops for the single and coupled Chua systems.

Parameter vectors use the layout of ``dynamics.CircuitParams.as_vector``:
[c_a, c_b, l, r, r_0, g_a, g_b, b_p, b_outer, g_outer, five_segment].

The single and pair loops perform identical per-element arithmetic, so an
uncoupled pair reproduces two single-circuit runs bit for bit.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def diode(v, p):
    g_a = p[5]
    g_b = p[6]
    b_p = p[7]
    if p[10] != 0.0:
        g_o = p[9]
        b_o = p[8]
        return (g_o * v + 0.5 * (g_a - g_b) * (abs(v + b_p) - abs(v - b_p))
                + 0.5 * (g_b - g_o) * (abs(v + b_o) - abs(v - b_o)))
    return g_b * v + 0.5 * (g_a - g_b) * (abs(v + b_p) - abs(v - b_p))


@njit(cache=True)
def chua_rhs(s, off, p, out):
    v_a = s[off]
    v_b = s[off + 1]
    i_l = s[off + 2]
    out[off] = ((v_b - v_a) / p[3] - diode(v_a, p)) / p[0]
    out[off + 1] = ((v_a - v_b) / p[3] + i_l) / p[1]
    out[off + 2] = (-v_b - p[4] * i_l) / p[2]


@njit(cache=True)
def pair_rhs(s, ptx, prx, g_c, node, noise, out):
    chua_rhs(s, 0, ptx, out)
    chua_rhs(s, 3, prx, out)
    if g_c != 0.0:
        # current flowing tx -> rx through the coupling resistor
        i_c = (s[node] - s[3 + node] + noise) * g_c
        out[node] -= i_c / ptx[node]
        out[3 + node] += i_c / prx[node]


@njit(cache=True)
def _all_finite(s):
    for x in s:
        if not np.isfinite(x):
            return False
    return True


@njit(cache=True)
def _rk4_single(s, p, dt, k1, k2, k3, k4, tmp):
    h = 0.5 * dt
    chua_rhs(s, 0, p, k1)
    for j in range(3):
        tmp[j] = s[j] + h * k1[j]
    chua_rhs(tmp, 0, p, k2)
    for j in range(3):
        tmp[j] = s[j] + h * k2[j]
    chua_rhs(tmp, 0, p, k3)
    for j in range(3):
        tmp[j] = s[j] + dt * k3[j]
    chua_rhs(tmp, 0, p, k4)
    for j in range(3):
        s[j] = s[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])


@njit(cache=True)
def _rk4_pair(s, ptx, prx, g_c, node, nz, dt, k1, k2, k3, k4, tmp):
    h = 0.5 * dt
    pair_rhs(s, ptx, prx, g_c, node, nz, k1)
    for j in range(6):
        tmp[j] = s[j] + h * k1[j]
    pair_rhs(tmp, ptx, prx, g_c, node, nz, k2)
    for j in range(6):
        tmp[j] = s[j] + h * k2[j]
    pair_rhs(tmp, ptx, prx, g_c, node, nz, k3)
    for j in range(6):
        tmp[j] = s[j] + dt * k3[j]
    pair_rhs(tmp, ptx, prx, g_c, node, nz, k4)
    for j in range(6):
        s[j] = s[j] + dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])


@njit(cache=True)
def run_single(s0, p, dt, n_skip, n_keep, stride):
    """Returns (samples, failed_step); failed_step is -1 on success."""
    s = s0.copy()
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    tmp = np.empty(3)
    out = np.empty((n_keep, 3))
    step = 0
    for _ in range(n_skip):
        _rk4_single(s, p, dt, k1, k2, k3, k4, tmp)
        step += 1
        if not _all_finite(s):
            return out[:0], step
    for i in range(n_keep):
        if i > 0:
            for _ in range(stride):
                _rk4_single(s, p, dt, k1, k2, k3, k4, tmp)
                step += 1
                if not _all_finite(s):
                    return out[:i], step
        out[i] = s
    return out, -1


@njit(cache=True)
def advance_single(s0, p, dt, n):
    s = s0.copy()
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    tmp = np.empty(3)
    for i in range(n):
        _rk4_single(s, p, dt, k1, k2, k3, k4, tmp)
        if not _all_finite(s):
            return s, i + 1
    return s, -1


@njit(cache=True)
def run_pair(s0, ptx, prx, g_c, node, noise, dt, n_skip, n_keep, stride):
    """Pair analogue of ``run_single``; ``noise`` holds one sync-line sample
    per step, or is empty for a clean line."""
    s = s0.copy()
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    out = np.empty((n_keep, 6))
    noisy = noise.shape[0] > 0
    nz = 0.0
    step = 0
    for _ in range(n_skip):
        if noisy:
            nz = noise[step]
        _rk4_pair(s, ptx, prx, g_c, node, nz, dt, k1, k2, k3, k4, tmp)
        step += 1
        if not _all_finite(s):
            return out[:0], step
    for i in range(n_keep):
        if i > 0:
            for _ in range(stride):
                if noisy:
                    nz = noise[step]
                _rk4_pair(s, ptx, prx, g_c, node, nz, dt, k1, k2, k3, k4, tmp)
                step += 1
                if not _all_finite(s):
                    return out[:i], step
        out[i] = s
    return out, -1


@njit(cache=True)
def advance_pair(s0, ptx, prx, g_c, node, dt, n):
    s = s0.copy()
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    for i in range(n):
        _rk4_pair(s, ptx, prx, g_c, node, 0.0, dt, k1, k2, k3, k4, tmp)
        if not _all_finite(s):
            return s, i + 1
    return s, -1


@njit(cache=True)
def rc_filter(x, y0, a):
    # y + (x - y) * a keeps constants exact (DC gain of exactly 1)
    y = np.empty_like(x)
    y[0] = y0
    for i in range(x.shape[0] - 1):
        y[i + 1] = y[i] + (x[i] - y[i]) * a
    return y
