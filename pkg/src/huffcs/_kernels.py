"""Compiled Huffman build for models whose join adds log-complements.

Matches the pure-Python heap in :func:`huffcs.tree.build_tree` pop for pop:
keys are ``(q, min_index)`` and min indices are unique among live nodes, so
the pop sequence does not depend on the heap's internal layout.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _sift_down(hq, hm, hk, pos, length):
    kq, km, kk = hq[pos], hm[pos], hk[pos]
    while True:
        child = 2 * pos + 1
        if child >= length:
            break
        other = child + 1
        if other < length and (hq[other] < hq[child] or (hq[other] == hq[child] and hm[other] < hm[child])):
            child = other
        if hq[child] < kq or (hq[child] == kq and hm[child] < km):
            hq[pos] = hq[child]
            hm[pos] = hm[child]
            hk[pos] = hk[child]
            pos = child
        else:
            break
    hq[pos] = kq
    hm[pos] = km
    hk[pos] = kk


@njit(cache=True)
def _two_queue(q, state, size, min_index, left, right, m):
    """Linear-time joins while the join queue stays in key order.

    With both queues sorted by ``(q, min_index)`` the two smallest live keys
    sit at the queue fronts, so the joins match the heap exactly.  Returns the
    first slot still to fill (``2m - 1`` when done) and the live entries.
    """
    leaf_order = np.argsort(q[:m], kind="mergesort")  # stable: ties keep index order
    total = 2 * m - 1
    li = 0
    mh = m
    for nxt in range(m, total):
        picked0 = -1
        picked1 = -1
        for r in range(2):
            if li < m and (mh >= nxt or q[leaf_order[li]] < q[mh]
                           or (q[leaf_order[li]] == q[mh] and min_index[leaf_order[li]] < min_index[mh])):
                k = leaf_order[li]
                li += 1
            else:
                k = mh
                mh += 1
            if r == 0:
                picked0 = k
            else:
                picked1 = k
        a, b = picked0, picked1
        if min_index[b] < min_index[a]:
            a, b = b, a
        st = state[a] + state[b]
        state[nxt] = st
        q[nxt] = -math.expm1(st)
        size[nxt] = size[a] + size[b]
        min_index[nxt] = min_index[a]
        left[nxt] = a
        right[nxt] = b
        prev = nxt - 1
        if nxt > mh and (q[nxt] < q[prev] or (q[nxt] == q[prev] and min_index[nxt] < min_index[prev])):
            # saturated q ties can invert the index order; hand over to the heap
            return nxt + 1, np.concatenate((leaf_order[li:], np.arange(mh, nxt + 1)))
    return total, np.empty(0, dtype=np.int64)


@njit(cache=True)
def build_additive(indices, log_off):
    """Arrays of the tree over ``indices`` (sorted) with leaf states ``log_off``."""
    m = indices.shape[0]
    total = 2 * m - 1
    q = np.empty(total)
    state = np.empty(total)
    size = np.ones(total, dtype=np.int64)
    min_index = np.zeros(total, dtype=np.int64)
    left = np.full(total, -1, dtype=np.int64)
    right = np.full(total, -1, dtype=np.int64)

    for k in range(m):
        state[k] = log_off[k]
        q[k] = -math.expm1(log_off[k])
        min_index[k] = indices[k]
    nxt, live = _two_queue(q, state, size, min_index, left, right, m)
    if nxt < total:
        _heap_joins(q, state, size, min_index, left, right, live, nxt, total)
    return _layout(size, min_index, left, right, q, m)


@njit(cache=True)
def _heap_joins(q, state, size, min_index, left, right, live, first, total):
    """Heap joins over the ``live`` slots, filling slots ``first..total-1``."""
    length = live.shape[0]
    hq = np.empty(length)
    hm = np.empty(length, dtype=np.int64)
    hk = np.empty(length, dtype=np.int64)
    for j in range(length):
        k = live[j]
        hq[j] = q[k]
        hm[j] = min_index[k]
        hk[j] = k
    for pos in range(length // 2 - 1, -1, -1):
        _sift_down(hq, hm, hk, pos, length)

    for nxt in range(first, total):
        a = hk[0]
        ia = hm[0]
        length -= 1
        hq[0] = hq[length]
        hm[0] = hm[length]
        hk[0] = hk[length]
        _sift_down(hq, hm, hk, 0, length)
        b = hk[0]
        ib = hm[0]
        if ib < ia:
            a, b, ia = b, a, ib
        st = state[a] + state[b]
        state[nxt] = st
        q[nxt] = -math.expm1(st)
        size[nxt] = size[a] + size[b]
        min_index[nxt] = ia
        left[nxt] = a
        right[nxt] = b
        # the joined node takes the second popped entry's slot
        hq[0] = q[nxt]
        hm[0] = ia
        hk[0] = nxt
        _sift_down(hq, hm, hk, 0, length)


@njit(cache=True)
def _layout(size, min_index, left, right, q, m):
    """Pre-order leaf layout (every subtree a contiguous slice) and ell costs."""
    total = 2 * m - 1
    start = np.zeros(total, dtype=np.int64)
    order = np.empty(m, dtype=np.int64)
    stack_k = np.empty(total, dtype=np.int64)
    stack_s = np.empty(total, dtype=np.int64)
    stack_k[0] = total - 1
    stack_s[0] = 0
    top = 1
    while top > 0:
        top -= 1
        k = stack_k[top]
        st0 = stack_s[top]
        start[k] = st0
        a = left[k]
        if a < 0:
            order[st0] = min_index[k]
        else:
            stack_k[top] = right[k]
            stack_s[top] = st0 + size[a]
            top += 1
            stack_k[top] = a
            stack_s[top] = st0
            top += 1
    cl = np.full(total, np.nan)
    cr = np.full(total, np.nan)
    for k in range(m, total):
        a = left[k]
        b = right[k]
        lg_l = math.log2(size[a]) + 1
        lg_r = math.log2(size[b]) + 1
        cl[k] = q[a] * lg_l + (1 - q[a]) * lg_r
        cr[k] = q[b] * lg_r + (1 - q[b]) * lg_l
    return q, size, min_index, left, right, start, order, cl, cr
