"""numba-compiled lattice kernels; see ``_kernels_numpy`` for the contracts."""
import numpy as np
from numba import njit

_jit = njit(cache=True, nogil=True)


@_jit
def popcounts(d):
    pc = np.zeros(1 << d, dtype=np.uint8)
    for i in range(d):
        lo = 1 << i
        for m in range(lo):
            pc[lo + m] = pc[m] + 1
    return pc


@_jit
def subset_stats(enc):
    d, p = enc.shape
    out = np.zeros((1 << d, p), dtype=np.float64)
    for i in range(d):
        lo = 1 << i
        for m in range(lo):
            for q in range(p):
                out[lo + m, q] = out[m, q] + enc[i, q]
    return out


@_jit
def held_out_sums(table, d):
    n = 1 << d
    out = np.empty(n)
    for m in range(n):
        tm = table[m]
        s = 0.0
        c = 0.0
        for i in range(d):
            bit = 1 << i
            if m & bit:
                x = tm - table[m ^ bit]
                t = s + x
                if abs(s) >= abs(x):
                    c += (s - t) + x
                else:
                    c += (x - t) + s
                s = t
        out[m] = s + c
    return out


@_jit
def added_sums(table, d):
    n = 1 << d
    out = np.empty(n)
    for m in range(n):
        tm = table[m]
        s = 0.0
        c = 0.0
        for j in range(d):
            bit = 1 << j
            if not m & bit:
                x = table[m | bit] - tm
                t = s + x
                if abs(s) >= abs(x):
                    c += (s - t) + x
                else:
                    c += (x - t) + s
                s = t
        out[m] = s + c
    return out


@_jit
def class_sum(values, pc, k):
    s = 0.0
    c = 0.0
    for m in range(values.shape[0]):
        if pc[m] == k:
            x = values[m]
            t = s + x
            if abs(s) >= abs(x):
                c += (s - t) + x
            else:
                c += (x - t) + s
            s = t
    return s + c


@_jit
def neumaier_sum(values):
    s = 0.0
    c = 0.0
    for m in range(values.shape[0]):
        x = values[m]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c
