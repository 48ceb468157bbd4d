"""Vectorised numpy kernels; reference path when numba is off."""

import numpy as np

TINY = 1e-300


def remaining_costs(cur, pos, plan_parts, collected):
    """Route length from ``cur`` through each plan's uncollected slots.

    ``plan_parts`` is (n_plans, max_slots) of part indices in priority
    order, right-padded with -1. Rows whose leading slots do not equal
    ``collected`` come back as +inf.
    """
    n, k = plan_parts.shape
    m = len(collected)
    out = np.full(n, np.inf)
    if n == 0 or m > k:
        return out
    ok = np.all(plan_parts[:, :m] == collected[None, :], axis=1)
    rest = plan_parts[:, m:]
    if rest.shape[1] == 0:
        out[ok] = 0.0
        return out
    valid = rest >= 0
    xy = pos[np.where(valid, rest, 0)]
    prev = np.empty_like(xy)
    prev[:, 0] = cur
    prev[:, 1:] = xy[:, :-1]
    legs = np.abs(xy - prev).sum(axis=2)
    legs = np.where(valid, legs, 0)
    out[ok] = legs[ok].sum(axis=1)
    return out


def route_costs(start, pos, plan_parts):
    return remaining_costs(start, pos, plan_parts, np.empty(0, dtype=np.int64))


def segment_softmax(values, offsets, beta):
    """Softmax of ``beta * values`` within each [offsets[i], offsets[i+1]) block.

    -inf entries get probability 0; a block with no finite entry is all zero.
    """
    n = len(values)
    out = np.zeros(n)
    if n == 0:
        return out
    counts = np.diff(offsets)
    seg = np.repeat(np.arange(len(counts)), counts)
    finite = np.isfinite(values)
    scaled = np.where(finite, beta * np.where(finite, values, 0.0), -np.inf)
    segmax = np.full(len(counts), -np.inf)
    np.maximum.at(segmax, seg, scaled)
    shift = segmax[seg]
    e = np.zeros(n)
    e[finite] = np.exp(scaled[finite] - shift[finite])
    sums = np.bincount(seg, weights=e, minlength=len(counts))
    denom = sums[seg]
    np.divide(e, denom, out=out, where=denom > 0)
    out[out < TINY] = 0.0
    return out
