"""Compiled inner loop of the gossip simulator.

Mirrors ``engine.apply_event`` operation for operation so that both paths
produce identical floating-point results from the same draws.
"""

import numpy as np
from numba import njit

ADV_NONE = 0
ADV_TIMESTOMP_NODE = 1
ADV_TIMESTOMP_LINK = 2
ADV_MUTATION = 3


@njit(cache=True)
def settle_node(i, t, w0, w1, gen, ver, acc, last, age_int, ver_int, acc_int):
    a0 = max(last[i], w0)
    a1 = min(t, w1)
    if a1 > a0:
        d = a1 - a0
        age_int[i] += (a0 - gen[i]) * d + 0.5 * d * d
        ver_int[i] += ver[i] * d
        if acc[i]:
            acc_int[i] += d
    last[i] = t


@njit(cache=True)
def settle_source(t, w0, w1, src_ver, src_int):
    # src_int = [integral of source version, last settle time]
    a0 = max(src_int[1], w0)
    a1 = min(t, w1)
    if a1 > a0:
        src_int[0] += src_ver[0] * (a1 - a0)
    src_int[1] = t


@njit(cache=True)
def run_block(t, horizon, w0, cum, src, dst, version_mode,
              adv_kind, infected, victim, p_out, out_current, q_in, in_current,
              p_mut, stomp_source,
              gen, marked, ver, acc, src_ver, src_gen,
              last, age_int, ver_int, acc_int, src_int,
              exps, us):
    """Process pre-drawn events until the block or the horizon runs out.

    Returns ``(now, events_applied, finished)``.
    """
    n_edges = cum.shape[0]
    total = cum[n_edges - 1]
    for k in range(exps.shape[0]):
        t_next = t + exps[k] / total
        if t_next > horizon:
            return horizon, k, True
        t = t_next
        j = np.searchsorted(cum, us[k, 0] * total, side="right")
        if j >= n_edges:
            j = n_edges - 1
        s = src[j]
        d = dst[j]

        if s < 0 and d < 0:
            settle_source(t, w0, horizon, src_ver, src_int)
            src_ver[0] += 1
            src_gen[0] = t
            continue

        if s < 0:
            if version_mode:
                g = src_gen[0]
                m = src_gen[0]
                v = src_ver[0]
            else:
                g = t
                m = t
                v = 0
            a = True
        else:
            g = gen[s]
            m = marked[s]
            v = ver[s]
            a = acc[s]

        if adv_kind == ADV_TIMESTOMP_NODE and s == infected and us[k, 1] < p_out:
            m = t if out_current else 0.0
        if version_mode and adv_kind == ADV_MUTATION and s >= 0 and us[k, 2] < p_mut:
            a = False
        stomp_in = False
        if adv_kind == ADV_TIMESTOMP_NODE and d == infected and (s >= 0 or stomp_source):
            stomp_in = True
        elif adv_kind == ADV_TIMESTOMP_LINK and s < 0 and d == victim:
            stomp_in = True
        if stomp_in and us[k, 3] < q_in:
            m = t if in_current else 0.0

        if version_mode:
            accept = v > ver[d] or (v == ver[d] and a and not acc[d])
        else:
            accept = m > marked[d]
        if accept:
            settle_node(d, t, w0, horizon, gen, ver, acc, last, age_int, ver_int, acc_int)
            gen[d] = g
            marked[d] = m
            ver[d] = v
            acc[d] = a
    return t, exps.shape[0], False
