"""Pure-numpy lattice kernels.

Reference path for the JIT kernels in ``_kernels_numba``: same arithmetic,
same accumulation order, so outputs agree bit for bit.  Masks are vectorized;
the per-mask accumulation runs over datum index in ascending order.
"""
import numpy as np

from .core import stable_sum


def popcounts(d):
    pc = np.zeros(1 << d, dtype=np.uint8)
    for i in range(d):
        lo = 1 << i
        pc[lo : 2 * lo] = pc[:lo] + 1
    return pc


def subset_stats(enc):
    """Sufficient statistics of every subset, shape ``(2**d, p)``.

    Row ``m`` is the sum of ``enc[i]`` over set bits of ``m``, accumulated in
    ascending ``i`` (each mask extends the one without its highest bit).
    """
    d, p = enc.shape
    out = np.zeros((1 << d, p), dtype=np.float64)
    for i in range(d):
        lo = 1 << i
        out[lo : 2 * lo] = out[:lo] + enc[i]
    return out


def _neumaier_step(s, c, x):
    t = s + x
    c += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, c


def held_out_sums(table, d):
    """Per mask ``A``: sum over ``i`` in ``A`` of ``table[A] - table[A - {i}]``."""
    masks = np.arange(1 << d, dtype=np.int64)
    s = np.zeros(1 << d)
    c = np.zeros(1 << d)
    for i in range(d):
        bit = 1 << i
        inside = (masks & bit) != 0
        x = np.zeros(1 << d)
        x[inside] = table[inside] - table[masks[inside] ^ bit]
        s, c = _neumaier_step(s, c, x)
    return s + c


def added_sums(table, d):
    """Per mask ``S``: sum over ``j`` not in ``S`` of ``table[S + {j}] - table[S]``."""
    masks = np.arange(1 << d, dtype=np.int64)
    s = np.zeros(1 << d)
    c = np.zeros(1 << d)
    for j in range(d):
        bit = 1 << j
        outside = (masks & bit) == 0
        x = np.zeros(1 << d)
        x[outside] = table[masks[outside] | bit] - table[outside]
        s, c = _neumaier_step(s, c, x)
    return s + c


def class_sum(values, pc, k):
    """Compensated sum of ``values[m]`` over masks with ``k`` bits, ascending ``m``."""
    return stable_sum(values[pc == k].tolist())


def neumaier_sum(values):
    return stable_sum(values.tolist())
