#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy reference.

Times single-sequence contraction, slot restriction and partial traces over a
range of comb sizes and prints median runtimes plus the numba speedup.

Run:  python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from combkit._kernels import reference

try:
    from combkit._kernels import jit
except ImportError:
    jit = None


def time_median(func, *args, repeats=50, warmup=3):
    for _ in range(warmup):
        func(*args)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        func(*args)
        times.append(time.perf_counter() - start)
    return float(np.median(times)) * 1e6  # microseconds


def random_matrix(rng, d):
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def bench_contract(rng, slots, repeats):
    dims = [4] * slots
    d = int(np.prod(dims))
    ups = random_matrix(rng, d)
    maps = [random_matrix(rng, s) for s in dims]
    ref = time_median(reference.contract_sequence, ups, dims, maps, repeats=repeats)
    acc = (
        time_median(jit.contract_sequence, ups, dims, maps, repeats=repeats)
        if jit
        else float("nan")
    )
    return f"contract {slots} qubit slots (dim {d})", ref, acc


def bench_restrict(rng, slots, repeats):
    out_dims = in_dims = [2] * slots
    d = 4**slots
    ups = random_matrix(rng, d)
    removed = [i % 2 == 1 for i in range(slots)]
    ref = time_median(
        reference.restrict_slots, ups, out_dims, in_dims, removed, repeats=repeats
    )
    acc = (
        time_median(jit.restrict_slots, ups, out_dims, in_dims, removed, repeats=repeats)
        if jit
        else float("nan")
    )
    return f"restrict {sum(removed)}/{slots} slots (dim {d})", ref, acc


def bench_ptrace(rng, legs, repeats):
    dims = [2] * legs
    d = 2**legs
    m = random_matrix(rng, d)
    keep = [i % 2 == 0 for i in range(legs)]
    ref = time_median(reference.partial_trace, m, dims, keep, repeats=repeats)
    acc = (
        time_median(jit.partial_trace, m, dims, keep, repeats=repeats)
        if jit
        else float("nan")
    )
    return f"partial trace {legs - sum(keep)}/{legs} legs (dim {d})", ref, acc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=50)
    args = parser.parse_args()

    if jit is None:
        print("numba not installed: timing the numpy reference only\n")

    rng = np.random.default_rng(0)
    rows = []
    for slots in (2, 3, 4, 5):
        rows.append(bench_contract(rng, slots, args.repeats))
    for slots in (2, 3, 4):
        rows.append(bench_restrict(rng, slots, args.repeats))
    for legs in (6, 8, 10):
        rows.append(bench_ptrace(rng, legs, args.repeats))

    width = max(len(name) for name, _, _ in rows)
    print(f"{'kernel':<{width}}  {'numpy [us]':>12}  {'numba [us]':>12}  {'speedup':>8}")
    for name, ref, acc in rows:
        speedup = ref / acc if acc == acc and acc > 0 else float("nan")
        print(f"{name:<{width}}  {ref:>12.1f}  {acc:>12.1f}  {speedup:>7.2f}x")


if __name__ == "__main__":
    main()
