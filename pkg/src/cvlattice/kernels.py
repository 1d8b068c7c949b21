"""Backend selection for the lattice kernels.

numba is used when importable unless ``CVLATTICE_NO_NUMBA`` is set to a
non-empty value other than ``0``; the pure-numpy path is always available as
``numpy_kernels`` for comparison.
"""
import os

from . import _kernels_numpy as numpy_kernels

try:
    from . import _kernels_numba as numba_kernels
except ImportError:  # numba not installed
    numba_kernels = None

_disabled = os.environ.get("CVLATTICE_NO_NUMBA", "") not in ("", "0")

if numba_kernels is not None and not _disabled:
    active = numba_kernels
    BACKEND = "numba"
else:
    active = numpy_kernels
    BACKEND = "numpy"

popcounts = active.popcounts
subset_stats = active.subset_stats
held_out_sums = active.held_out_sums
added_sums = active.added_sums
class_sum = active.class_sum
neumaier_sum = active.neumaier_sum

__all__ = [
    "BACKEND",
    "numpy_kernels",
    "numba_kernels",
    "popcounts",
    "subset_stats",
    "held_out_sums",
    "added_sums",
    "class_sum",
    "neumaier_sum",
]
