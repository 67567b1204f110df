"""Numba-compiled kernels, signature-compatible with the reference backend.

The compiled loops decode flat matrix indices into per-leg components with
precomputed strides, so no large intermediate tensors are allocated.
"""

import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True)
def _contract_kernel(ups, packed, offsets, dims):
    # Peel one slot per pass: with the leading slot factored out as
    # cur[(u, r), (v, c)], the partial contraction is
    # nxt[r, c] = sum_{u,v} M[u, v] * cur[(u, r), (v, c)].
    k = dims.size
    size = ups.shape[0]
    cur = ups.copy()
    for j in range(k):
        dj = dims[j]
        rem = size // dj
        nxt = np.zeros((rem, rem), np.complex128)
        base = offsets[j]
        for u in range(dj):
            for v in range(dj):
                m = packed[base + u * dj + v]
                if m != 0:
                    uo = u * rem
                    vo = v * rem
                    for r in range(rem):
                        for c in range(rem):
                            nxt[r, c] += m * cur[uo + r, vo + c]
        cur = nxt
        size = rem
    return cur[0, 0]


@njit(cache=True)
def _offsets_kernel(leg_dims, flags):
    """Flat-index contribution tables for the flagged subset of legs.

    Returns an array ``offs`` of length prod(dims of flagged legs) where
    ``offs[t]`` is the full flat index with the flagged legs set according to
    the mixed-radix decomposition of ``t`` and all other legs zero.
    """
    n = leg_dims.size
    strides = np.empty(n, np.int64)
    s = 1
    for i in range(n - 1, -1, -1):
        strides[i] = s
        s *= leg_dims[i]
    size = 1
    for i in range(n):
        if flags[i]:
            size *= leg_dims[i]
    offs = np.zeros(size, np.int64)
    block = size
    for i in range(n):
        if flags[i]:
            d = leg_dims[i]
            block //= d
            for t in range(size):
                comp = (t // block) % d
                offs[t] += comp * strides[i]
    return offs


@njit(cache=True)
def _restrict_kernel(ups, leg_dims, kept_legs, removed_pairs):
    offs_keep = _offsets_kernel(leg_dims, kept_legs)
    n = leg_dims.size
    strides = np.empty(n, np.int64)
    s = 1
    for i in range(n - 1, -1, -1):
        strides[i] = s
        s *= leg_dims[i]
    # Removed slots contribute equal out/in components (the Phi+ diagonal),
    # so build offsets over one component per removed slot.
    n_rem = 0
    for j in range(removed_pairs.size):
        if removed_pairs[j]:
            n_rem += 1
    rem_size = 1
    for j in range(removed_pairs.size):
        if removed_pairs[j]:
            rem_size *= leg_dims[2 * j]
    offs_rem = np.zeros(rem_size, np.int64)
    block = rem_size
    for j in range(removed_pairs.size):
        if removed_pairs[j]:
            d = leg_dims[2 * j]
            block //= d
            for t in range(rem_size):
                comp = (t // block) % d
                offs_rem[t] += comp * (strides[2 * j] + strides[2 * j + 1])
    d_keep = offs_keep.size
    out = np.zeros((d_keep, d_keep), np.complex128)
    for r in range(d_keep):
        for c in range(d_keep):
            acc = 0.0 + 0.0j
            for tr in range(rem_size):
                row = offs_keep[r] + offs_rem[tr]
                for tc in range(rem_size):
                    acc += ups[row, offs_keep[c] + offs_rem[tc]]
            out[r, c] = acc
    return out


@njit(cache=True)
def _ptrace_kernel(matrix, leg_dims, keep):
    kept = keep
    traced = np.empty(leg_dims.size, np.bool_)
    for i in range(leg_dims.size):
        traced[i] = not kept[i]
    offs_keep = _offsets_kernel(leg_dims, kept)
    offs_tr = _offsets_kernel(leg_dims, traced)
    d_keep = offs_keep.size
    out = np.zeros((d_keep, d_keep), np.complex128)
    for r in range(d_keep):
        for c in range(d_keep):
            acc = 0.0 + 0.0j
            for t in range(offs_tr.size):
                acc += matrix[offs_keep[r] + offs_tr[t], offs_keep[c] + offs_tr[t]]
            out[r, c] = acc
    return out


def contract_sequence(upsilon, slot_dims, maps) -> complex:
    k = len(slot_dims)
    if k == 0:
        return complex(upsilon[0, 0])
    dims = np.asarray(slot_dims, dtype=np.int64)
    packed = np.concatenate(
        [np.ascontiguousarray(m, dtype=np.complex128).reshape(-1) for m in maps]
    )
    offsets = np.zeros(k, np.int64)
    pos = 0
    for j in range(k):
        offsets[j] = pos
        pos += int(dims[j]) ** 2
    ups = np.ascontiguousarray(upsilon, dtype=np.complex128)
    return complex(_contract_kernel(ups, packed, offsets, dims))


def restrict_slots(upsilon, out_dims, in_dims, removed):
    k = len(out_dims)
    leg_dims = np.empty(2 * k, np.int64)
    kept_legs = np.empty(2 * k, np.bool_)
    removed_pairs = np.asarray(removed, dtype=np.bool_)
    for j in range(k):
        leg_dims[2 * j] = int(out_dims[j])
        leg_dims[2 * j + 1] = int(in_dims[j])
        kept_legs[2 * j] = not removed_pairs[j]
        kept_legs[2 * j + 1] = not removed_pairs[j]
    ups = np.ascontiguousarray(upsilon, dtype=np.complex128)
    return _restrict_kernel(ups, leg_dims, kept_legs, removed_pairs)


def partial_trace(matrix, leg_dims, keep):
    dims = np.asarray(leg_dims, dtype=np.int64)
    keep_arr = np.asarray(keep, dtype=np.bool_)
    m = np.ascontiguousarray(matrix, dtype=np.complex128)
    return _ptrace_kernel(m, dims, keep_arr)
