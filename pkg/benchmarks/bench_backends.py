"""Time the numba and pure-numpy lattice kernels on the same inputs.

    python benchmarks/bench_backends.py --min-d 12 --max-d 20

Each row also checks that the two backends produced bit-identical tables.
"""
import argparse
import math
import time

import numpy as np

from cvlattice import lattice
from cvlattice.core import Dataset
from cvlattice.kernels import numba_kernels, numpy_kernels
from cvlattice.models import BetaBernoulli


def decompose(backend, h, data):
    """One full verification pass with ``backend`` swapped in for the active kernels."""
    saved = {name: getattr(lattice.kernels, name) for name in ("subset_stats", "popcounts", "held_out_sums", "added_sums", "class_sum")}
    for name in saved:
        setattr(lattice.kernels, name, getattr(backend, name))
    try:
        cache = lattice.build_cache(h, data)
        return lattice.per_cardinality_scores(cache), lattice.per_datum_decomposition(cache)
    finally:
        for name, fn in saved.items():
            setattr(lattice.kernels, name, fn)


def best_of(fn, repeats):
    best = math.inf
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--min-d", type=int, default=12)
    ap.add_argument("--max-d", type=int, default=20)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if numba_kernels is None:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    h = BetaBernoulli(1.5, 2.0)
    decompose(numba_kernels, h, Dataset([1, 0, 1]))  # compile

    print(f"{'d':>3} {'numpy_s':>10} {'numba_s':>10} {'speedup':>8}  identical")
    for d in range(args.min_d, args.max_d + 1):
        data = Dataset(rng.integers(0, 2, d), kind="binary")
        t_np, ref = best_of(lambda: decompose(numpy_kernels, h, data), args.repeats)
        t_nb, got = best_of(lambda: decompose(numba_kernels, h, data), args.repeats)
        print(f"{d:>3} {t_np:>10.4f} {t_nb:>10.4f} {t_np / t_nb:>8.1f}  {got == ref}")


if __name__ == "__main__":
    main()
