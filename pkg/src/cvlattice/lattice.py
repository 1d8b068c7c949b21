"""Subset-lattice engine.

Caches the log marginal likelihood of all ``2**d`` data subsets once, then
reads every cross-validation quantity off the cache:

* leave-one-out and leave-m-out log-scores of the full data,
* the per-cardinality table: for each subset size ``k`` the LOO log-score
  computed inside every size-``k`` subset, averaged over those subsets.
  The rows sum to the log-likelihood of the full data;
* the per-datum table: each datum's log predictive given every subset of the
  other data, averaged per conditioning size.  Its rows also sum to the
  log-likelihood.

All averages are accumulated in a fixed order (ascending mask, then
ascending datum index) with compensated summation, so results do not depend
on the number of worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .core import (
    CapacityError,
    Dataset,
    PreconditionError,
    ZeroProbabilityError,
    full_mask,
    stable_sum,
)
from .models import Hypothesis, evaluate

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MarginalCache:
    hypothesis: Hypothesis
    data: Dataset
    table: np.ndarray = field(repr=False)
    popcount: np.ndarray = field(repr=False)
    evaluations: int

    @property
    def d(self) -> int:
        return self.data.d

    @property
    def full(self) -> int:
        return full_mask(self.d)

    @property
    def direct(self) -> float:
        """Log-likelihood of the full data."""
        return float(self.table[-1])

    def __getitem__(self, mask: int) -> float:
        return float(self.table[mask])


def build_cache(h: Hypothesis, data: Dataset, d_max: int | None = None) -> MarginalCache:
    """Log marginal of every subset, one closed-form evaluation per non-empty subset.

    Statistics are built by extension: the subset ``m`` adds its highest
    datum to ``m`` without that datum, so no subset is summed from scratch.
    """
    cap = data.d_max if d_max is None else d_max
    if data.d > cap:
        raise CapacityError(f"dataset holds {data.d} data but the lattice cap is d_max={cap}")
    h.check(data)
    d = data.d
    enc = np.ascontiguousarray(h.encode(data), dtype=np.float64)
    stats = kernels.subset_stats(enc)
    pc = kernels.popcounts(d)
    table = np.empty(1 << d)
    table[0] = 0.0
    table[1:] = evaluate(h, pc[1:].astype(np.float64), stats[1:])
    del stats
    if np.isnan(table).any():
        raise ArithmeticError(f"{h.kind} {h.name!r} produced NaN log marginals")
    table.setflags(write=False)
    pc.setflags(write=False)
    return MarginalCache(h, data, table, pc, evaluations=(1 << d) - 1)


def _require_finite(cache: MarginalCache) -> None:
    if np.isneginf(cache.table).any():
        bad = int(np.flatnonzero(np.isneginf(cache.table))[0])
        raise ZeroProbabilityError(
            f"subset {bad:#x} has probability zero under {cache.hypothesis.name!r}; "
            "the subset decomposition needs every conditional to exist"
        )


# -- cross-validation scores ----------------------------------------------


@dataclass(frozen=True)
class CvScore:
    m: int | None
    value: float
    scheme: str  # "leave-m-out-exhaustive" | "k-fold-partition"
    folds: int | None = None


def _held_out_terms(cache: MarginalCache, rest: np.ndarray, sizes) -> list[float]:
    t_full = cache.table[-1]
    t_rest = cache.table[rest]
    if np.isneginf(t_rest).any():
        raise ZeroProbabilityError("a conditioning subset has probability zero")
    return ((t_full - t_rest) / sizes).tolist()


def loo_score(cache: MarginalCache) -> CvScore:
    """Mean log predictive of each datum given all the others."""
    d = cache.d
    if d < 2:
        raise PreconditionError("leave-one-out needs at least 2 data")
    rest = np.array([cache.full ^ (1 << i) for i in range(d)], dtype=np.int64)
    terms = _held_out_terms(cache, rest, 1.0)
    return CvScore(1, stable_sum(terms) / d, "leave-m-out-exhaustive")


def leave_m_out_score(cache: MarginalCache, m: int) -> CvScore:
    """Mean over all held-out sets of size ``m`` of the held-out log predictive per datum.

    Held-out sets are visited in ascending mask order, so ``m=1`` repeats the
    LOO accumulation exactly.
    """
    d = cache.d
    if not 1 <= m <= d - 1:
        raise PreconditionError(f"leave-out size m must lie in 1..{d - 1}, got {m}")
    rest = np.flatnonzero(cache.popcount == d - m)[::-1]
    terms = _held_out_terms(cache, rest, float(m))
    return CvScore(m, stable_sum(terms) / len(terms), "leave-m-out-exhaustive")


def kfold_score(cache: MarginalCache, folds: Sequence[int]) -> CvScore:
    """Score for a user-given partition: mean over folds of held-out log predictive per datum.

    ``folds[i]`` is the fold label of datum ``i``.  No identity with the
    log-likelihood is claimed for this scheme.
    """
    d = cache.d
    if len(folds) != d:
        raise PreconditionError(f"need one fold label per datum ({d}), got {len(folds)}")
    labels = sorted(set(folds))
    if len(labels) < 2:
        raise PreconditionError("a partition needs at least 2 folds")
    masks = [sum(1 << i for i in range(d) if folds[i] == lab) for lab in labels]
    rest = np.array([cache.full ^ f for f in masks], dtype=np.int64)
    sizes = np.array([bin(f).count("1") for f in masks], dtype=np.float64)
    terms = _held_out_terms(cache, rest, sizes)
    return CvScore(None, stable_sum(terms) / len(terms), "k-fold-partition", folds=len(labels))


# -- decompositions -------------------------------------------------------


@dataclass(frozen=True)
class DecompositionRow:
    k: int
    count: int
    score: float
    cumulative: float


@dataclass(frozen=True)
class DecompositionTable:
    """Rows whose scores add up to the log-likelihood.

    ``form`` is ``"per_cardinality"`` (``k`` = subset size, 1..d) or
    ``"per_datum"`` (``k`` = conditioning-set size, 0..d-1).
    """

    form: str
    rows: tuple[DecompositionRow, ...]
    reconstructed: float
    direct: float

    @property
    def residual(self) -> float:
        return self.reconstructed - self.direct

    @property
    def scores(self) -> dict[int, float]:
        return {r.k: r.score for r in self.rows}


def _class_sums(values: np.ndarray, pc: np.ndarray, ks: Sequence[int], threads: int) -> list[float]:
    if threads <= 1 or len(ks) < 2:
        return [float(kernels.class_sum(values, pc, k)) for k in ks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return [float(x) for x in pool.map(lambda k: kernels.class_sum(values, pc, k), ks)]


def _assemble(form, ks, counts, scores, direct) -> DecompositionTable:
    rows = []
    s = c = 0.0
    for k, n, x in zip(ks, counts, scores):
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        rows.append(DecompositionRow(k, n, x, s + c))
    return DecompositionTable(form, tuple(rows), rows[-1].cumulative, direct)


def per_cardinality_scores(cache: MarginalCache, threads: int = 1) -> DecompositionTable:
    """For each size ``k``: the LOO score inside each ``k``-subset, averaged over subsets."""
    _require_finite(cache)
    d, pc = cache.d, cache.popcount
    held = kernels.held_out_sums(cache.table, d)
    held[1:] /= pc[1:]
    ks = list(range(1, d + 1))
    sums = _class_sums(held, pc, ks, threads)
    counts = [math.comb(d, k) for k in ks]
    scores = [s / n for s, n in zip(sums, counts)]
    return _assemble("per_cardinality", ks, counts, scores, cache.direct)


def per_datum_decomposition(cache: MarginalCache, threads: int = 1) -> DecompositionTable:
    """For each conditioning size ``k``: every datum's log predictive given every
    ``k``-subset of the other data, averaged over subsets and data."""
    _require_finite(cache)
    d, pc = cache.d, cache.popcount
    added = kernels.added_sums(cache.table, d)
    ks = list(range(d))
    sums = _class_sums(added, pc, ks, threads)
    counts = [math.comb(d - 1, k) for k in ks]
    scores = [s / (d * n) for s, n in zip(sums, counts)]
    return _assemble("per_datum", ks, counts, scores, cache.direct)


@dataclass(frozen=True)
class VerificationResult:
    passed: bool
    tolerance: float
    direct: float
    per_cardinality: DecompositionTable
    per_datum: DecompositionTable
    evaluations: int

    @property
    def residual_compact(self) -> float:
        return self.per_cardinality.residual

    @property
    def residual_per_datum(self) -> float:
        return self.per_datum.residual


def within_tolerance(residual: float, direct: float, tolerance: float) -> bool:
    return abs(residual) <= tolerance * max(1.0, abs(direct))


def verify_identity(
    h: Hypothesis,
    data: Dataset,
    tolerance: float = DEFAULT_TOLERANCE,
    threads: int = 1,
    d_max: int | None = None,
) -> VerificationResult:
    """Check that both decompositions reproduce the log-likelihood.

    Passes iff each residual is within ``tolerance * max(1, |log-likelihood|)``.
    """
    if not tolerance > 0:
        raise PreconditionError(f"tolerance must be > 0, got {tolerance}")
    cache = build_cache(h, data, d_max)
    compact = per_cardinality_scores(cache, threads)
    datum = per_datum_decomposition(cache, threads)
    ok = within_tolerance(compact.residual, cache.direct, tolerance) and within_tolerance(
        datum.residual, cache.direct, tolerance
    )
    return VerificationResult(ok, tolerance, cache.direct, compact, datum, cache.evaluations)
