#!/usr/bin/env python3
"""Benchmark the jitted edit-distance kernel against the numpy fallback.

The active kernel is chosen by the WARC2META_NO_NUMBA env flag at import
time, so both paths are timed here by calling the kernels directly.

Usage: python3 benchmarks/bench_levenshtein.py [--pairs N] [--length L]
"""

import argparse
import random
import time

import numpy as np

from warc2meta import _accel


def make_pairs(n, length, seed=0):
    rng = random.Random(seed)
    pairs = []
    for _ in range(n):
        a = np.array([rng.randint(97, 122) for _ in range(length)], dtype=np.int32)
        b = np.array([rng.randint(97, 122) for _ in range(length)], dtype=np.int32)
        pairs.append((a, b))
    return pairs


def bench(fn, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        started = time.perf_counter()
        for a, b in pairs:
            fn(a, b)
        best = min(best, time.perf_counter() - started)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--length", type=int, default=64)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.length)
    results = {"numpy": bench(_accel._lev_kernel_numpy, pairs)}
    if _accel.USE_NUMBA:
        _accel._lev_kernel_numba(*pairs[0])  # warm the JIT before timing
        results["numba"] = bench(_accel._lev_kernel_numba, pairs)
        a, b = pairs[0]
        assert _accel._lev_kernel_numba(a, b) == _accel._lev_kernel_numpy(a, b)
    else:
        print("numba disabled (WARC2META_NO_NUMBA set or numba missing)")

    print(f"{args.pairs} pairs of length {args.length}:")
    for name, secs in results.items():
        rate = args.pairs / secs
        print(f"  {name:>6}: {secs:.3f}s ({rate:,.0f} pairs/s)")
    if "numba" in results:
        print(f"  speedup: {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
