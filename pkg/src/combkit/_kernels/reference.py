"""Pure-numpy kernels (einsum / tensordot based).

All kernels work in storage order: slot 0 is the latest time, and within a
slot the output leg precedes the input leg.
"""

import numpy as np

NAME = "numpy"


def contract_sequence(upsilon: np.ndarray, slot_dims, maps) -> complex:
    """tr[(M_0 ⊗ ... ⊗ M_{k-1})^T-elementwise contraction] of a comb matrix.

    ``slot_dims`` are the composite (out*in) dimensions per slot, ``maps`` one
    square matrix per slot, both in storage order.
    """
    k = len(slot_dims)
    if k == 0:
        return complex(upsilon[0, 0])
    dims = list(slot_dims)
    tensor = upsilon.reshape(dims + dims)
    col = k
    for m in maps:
        tensor = np.tensordot(tensor, m, axes=([0, col], [0, 1]))
        col -= 1
    return complex(tensor)


def restrict_slots(upsilon: np.ndarray, out_dims, in_dims, removed) -> np.ndarray:
    """Remove the flagged slots by projecting them onto the identity channel.

    Removed slots must be square (out dim == in dim).  Elementwise this sums
    the removed slots' (out == in) diagonals on the row and column sides
    independently.
    """
    k = len(out_dims)
    leg_dims = []
    for j in range(k):
        leg_dims.extend((int(out_dims[j]), int(in_dims[j])))
    tensor = upsilon.reshape(leg_dims + leg_dims)

    row_labels, col_labels, out_rows, out_cols = [], [], [], []
    nxt = 0
    for j in range(k):
        if removed[j]:
            r = nxt
            c = nxt + 1
            nxt += 2
            row_labels += [r, r]
            col_labels += [c, c]
        else:
            a, b, c, d = nxt, nxt + 1, nxt + 2, nxt + 3
            nxt += 4
            row_labels += [a, b]
            col_labels += [c, d]
            out_rows += [a, b]
            out_cols += [c, d]

    result = np.einsum(tensor, row_labels + col_labels, out_rows + out_cols)
    kept = 1
    for j in range(k):
        if not removed[j]:
            kept *= int(out_dims[j]) * int(in_dims[j])
    return np.ascontiguousarray(result.reshape(kept, kept))


def partial_trace(matrix: np.ndarray, leg_dims, keep) -> np.ndarray:
    """Trace out the legs whose ``keep`` flag is false."""
    n = len(leg_dims)
    dims = [int(d) for d in leg_dims]
    tensor = matrix.reshape(dims + dims)

    row_labels = list(range(n))
    col_labels = []
    out_rows, out_cols = [], []
    nxt = n
    for i in range(n):
        if keep[i]:
            col_labels.append(nxt)
            out_rows.append(i)
            out_cols.append(nxt)
            nxt += 1
        else:
            col_labels.append(i)

    result = np.einsum(tensor, row_labels + col_labels, out_rows + out_cols)
    kept = 1
    for i in range(n):
        if keep[i]:
            kept *= dims[i]
    return np.ascontiguousarray(result.reshape(kept, kept))
