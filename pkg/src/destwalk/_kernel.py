"""Compiled inner loop of the walk.

Mirrors ``core.propose_step`` step for step; the simulator only feeds it
pre-drawn random inputs, so all randomness stays in the numpy generator.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def advance(x, dest, relative, frames, beta, gamma, alpha, l_max, singular_rel,
            at_dest, start, pos_out, dest_out, r_out, l_out, lraw_out, scratch):
    """Walk from step ``start`` through the block, updating ``x`` in place.

    Returns the index of the first step whose frame produced a singular
    rotated component (the caller redraws that frame and resumes there),
    or the block length when every step completed.
    """
    n = x.shape[0]
    steps = dest.shape[0]
    g_abs = abs(gamma)
    r_vec = scratch[0]
    rp = scratch[1]
    dp = scratch[2]
    for t in range(start, steps):
        r2 = 0.0
        for i in range(n):
            pos_out[t, i] = x[i]
            d = x[i] + dest[t, i] if relative else dest[t, i]
            dest_out[t, i] = d
            r_vec[i] = d - x[i]
            r2 += r_vec[i] * r_vec[i]
        r = math.sqrt(r2)
        r_out[t] = r
        if r < at_dest:
            l_out[t] = 0.0
            lraw_out[t] = 0.0
            continue
        floor = singular_rel * max(1.0, r)
        for j in range(n):
            s = 0.0
            for i in range(n):
                s += frames[t, i, j] * r_vec[i]
            rp[j] = s
        ll = 0.0
        for j in range(n):
            if gamma < 0 and abs(rp[j]) < floor:
                return t
            eta = beta[t, j] ** (1.0 - g_abs) * (rp[j] * rp[j] / r2) ** gamma
            if eta > 0:
                if abs(rp[j]) < floor:
                    return t
                dp[j] = alpha * eta * r2 / rp[j]
            else:
                dp[j] = 0.0
            ll += dp[j] * dp[j]
        l_raw = math.sqrt(ll)
        lraw_out[t] = l_raw
        if l_raw > l_max:
            scale = l_max / l_raw
            for j in range(n):
                dp[j] *= scale
            l_out[t] = l_max
        else:
            l_out[t] = l_raw
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += frames[t, i, j] * dp[j]
            x[i] += s
    return steps


def warmup():
    """Trigger compilation with tiny inputs."""
    x = np.zeros(2)
    z1 = np.zeros((1, 2))
    frames = np.eye(2)[None]
    advance(x, np.ones((1, 2)), True, frames, np.full((1, 2), 0.5), 0.0, 0.1, 10.0,
            1e-12, 1e-15, 0, z1.copy(), z1.copy(), np.zeros(1), np.zeros(1),
            np.zeros(1), np.zeros((3, 2)))
