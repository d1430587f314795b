"""Edit-distance kernels: numba-jitted loop or pure-numpy fallback.

Set WARC2META_NO_NUMBA=1 to force the numpy path (also used when numba
is not importable). Both kernels operate on int32 code-point arrays and
agree exactly; benchmarks/bench_levenshtein.py compares them.
"""

import os

import numpy as np

USE_NUMBA = os.environ.get("WARC2META_NO_NUMBA", "") not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:
        USE_NUMBA = False

if USE_NUMBA:

    @njit(cache=True)
    def _lev_kernel_numba(a, b):
        n = b.shape[0]
        prev = np.arange(n + 1, dtype=np.int32)
        cur = np.empty(n + 1, dtype=np.int32)
        for i in range(a.shape[0]):
            cur[0] = i + 1
            ca = a[i]
            for j in range(n):
                sub = prev[j] + (0 if b[j] == ca else 1)
                dele = prev[j + 1] + 1
                ins = cur[j] + 1
                best = sub
                if dele < best:
                    best = dele
                if ins < best:
                    best = ins
                cur[j + 1] = best
            prev, cur = cur, prev
        return int(prev[n])


def _lev_kernel_numpy(a, b):
    # Row-wise DP; the insertion recurrence cur[j] = min over k<=j of
    # cand[k] + (j-k) is a prefix-min of cand[k]-k, shifted back.
    n = b.shape[0]
    prev = np.arange(n + 1, dtype=np.int64)
    idx = np.arange(n + 1, dtype=np.int64)
    for i in range(a.shape[0]):
        cand = np.empty(n + 1, dtype=np.int64)
        cand[0] = i + 1
        np.minimum(prev[:-1] + (b != a[i]), prev[1:] + 1, out=cand[1:])
        prev = np.minimum.accumulate(cand - idx) + idx
    return int(prev[n])


def levenshtein_codes(a: np.ndarray, b: np.ndarray) -> int:
    """Edit distance between two int32 code-point arrays."""
    if a.shape[0] == 0:
        return int(b.shape[0])
    if b.shape[0] == 0:
        return int(a.shape[0])
    if USE_NUMBA:
        return _lev_kernel_numba(a, b)
    return _lev_kernel_numpy(a, b)
