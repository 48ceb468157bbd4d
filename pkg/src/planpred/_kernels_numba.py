"""numba-compiled kernels; same contracts as the numpy module."""

import numpy as np
from numba import njit

TINY = 1e-300


@njit(cache=True)
def remaining_costs(cur, pos, plan_parts, collected):
    n, k = plan_parts.shape
    m = collected.shape[0]
    out = np.full(n, np.inf)
    if m > k:
        return out
    for i in range(n):
        ok = True
        for j in range(m):
            if plan_parts[i, j] != collected[j]:
                ok = False
                break
        if not ok:
            continue
        x = cur[0]
        y = cur[1]
        total = 0
        for j in range(m, k):
            p = plan_parts[i, j]
            if p < 0:
                break
            total += abs(pos[p, 0] - x) + abs(pos[p, 1] - y)
            x = pos[p, 0]
            y = pos[p, 1]
        out[i] = total
    return out


@njit(cache=True)
def _route_costs(start, pos, plan_parts):
    return remaining_costs(start, pos, plan_parts, np.empty(0, dtype=np.int64))


def route_costs(start, pos, plan_parts):
    return _route_costs(start, pos, plan_parts)


@njit(cache=True)
def _segment_softmax(values, offsets, beta):
    n = values.shape[0]
    out = np.zeros(n)
    for s in range(offsets.shape[0] - 1):
        lo = offsets[s]
        hi = offsets[s + 1]
        top = -np.inf
        for i in range(lo, hi):
            if np.isfinite(values[i]):
                v = beta * values[i]
                if v > top:
                    top = v
        if top == -np.inf:
            continue
        total = 0.0
        for i in range(lo, hi):
            if np.isfinite(values[i]):
                e = np.exp(beta * values[i] - top)
                out[i] = e
                total += e
        for i in range(lo, hi):
            p = out[i] / total
            out[i] = p if p >= TINY else 0.0
    return out


def segment_softmax(values, offsets, beta):
    return _segment_softmax(values, offsets, float(beta))
