"""Batch evaluation kernels with a numba fast path and a numpy fallback.

The fallback is selected when numba is unavailable or when the environment
variable WIENERCHAOS_DISABLE_NUMBA is set to a non-empty value other than
"0".  Both paths perform the identical sequence of IEEE operations per
sample (same entry order, same recurrence, no fastmath), so their outputs
are bitwise equal; tests assert this.

An element is prepared as flat arrays: for entry e, coeffs[e] is the
premultiplied coefficient q! * c, and slots offsets[e]:offsets[e+1] of
(coords, counts) hold the 0-based coordinate and its occupation count.
The per-sample value is sum_e coeffs[e] * prod_slots H_count(x[coord]).
"""

from __future__ import annotations

import os

import numpy as np

_flag = os.environ.get("WIENERCHAOS_DISABLE_NUMBA", "")
_numba_disabled = _flag not in ("", "0")

try:
    if _numba_disabled:
        raise ImportError("numba disabled by WIENERCHAOS_DISABLE_NUMBA")
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap

    prange = range


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


@njit(cache=True)
def _hermite_scalar(count, x):
    """H_count(x) by the recurrence H_{k+1} = (x H_k - H_{k-1}) / (k + 1)."""
    if count == 0:
        return 1.0
    prev = 1.0
    cur = x
    for k in range(1, count):
        prev, cur = cur, (x * cur - prev) / (k + 1)
    return cur


@njit(cache=True, parallel=True)
def _evaluate_numba(coords, counts, offsets, coeffs, x):
    n = x.shape[0]
    out = np.zeros(n)
    for i in prange(n):
        acc = 0.0
        for e in range(coeffs.shape[0]):
            term = coeffs[e]
            for s in range(offsets[e], offsets[e + 1]):
                term = term * _hermite_scalar(counts[s], x[i, coords[s]])
            acc = acc + term
        out[i] = acc
    return out


def _hermite_vector(count: int, x: np.ndarray) -> np.ndarray:
    if count == 0:
        return np.ones_like(x)
    prev = np.ones_like(x)
    cur = x.copy()
    for k in range(1, count):
        prev, cur = cur, (x * cur - prev) / (k + 1)
    return cur


def _evaluate_numpy(coords, counts, offsets, coeffs, x):
    n = x.shape[0]
    out = np.zeros(n)
    for e in range(coeffs.shape[0]):
        term = np.full(n, coeffs[e])
        for s in range(offsets[e], offsets[e + 1]):
            term = term * _hermite_vector(int(counts[s]), x[:, coords[s]])
        out = out + term
    return out


def evaluate_batch(coords, counts, offsets, coeffs, x) -> np.ndarray:
    """Per-sample values of a prepared element on a (n, N) sample block."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if HAVE_NUMBA:
        return _evaluate_numba(coords, counts, offsets, coeffs, x)
    return _evaluate_numpy(coords, counts, offsets, coeffs, x)
