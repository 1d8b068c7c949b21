"""Shared domain types: datasets, subset masks and log-space accumulation.

Everything is in natural-log units internally.  Decibels
(``10 * log10`` of a probability ratio) appear only at the reporting layer.

Subset masks are plain ``int`` bitmasks: bit ``i`` set means datum ``i``
(0-based) belongs to the subset.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

D_MAX_DEFAULT = 20
D_MAX_HARD = 26

DB_PER_NEPER = 10.0 / math.log(10.0)


class CvLatticeError(Exception):
    """Base class for all library errors."""


class PreconditionError(CvLatticeError, ValueError):
    """An operation was called outside its domain (e.g. LOO with d < 2)."""


class CapacityError(PreconditionError):
    """Dataset larger than the configured lattice cap."""


class ModelDataMismatch(CvLatticeError, ValueError):
    """Datum values are not of a kind the hypothesis can score."""


class ZeroProbabilityError(CvLatticeError, ArithmeticError):
    """A conditioning subset has probability zero, so the conditional is undefined."""


class DegenerateEvidenceError(CvLatticeError, ArithmeticError):
    """Every hypothesis with positive prior assigns the data probability zero."""


# -- subset masks ---------------------------------------------------------


def cardinality(mask: int) -> int:
    """Number of data in the subset encoded by ``mask``."""
    if mask < 0:
        raise ValueError("mask must be non-negative")
    return int(mask).bit_count()


def full_mask(d: int) -> int:
    return (1 << d) - 1


def mask_from_indices(indices: Iterable[int]) -> int:
    mask = 0
    for i in indices:
        if i < 0:
            raise ValueError(f"negative datum index {i}")
        mask |= 1 << int(i)
    return mask


def mask_indices(mask: int) -> list[int]:
    """Datum indices of ``mask`` in ascending order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def check_mask(mask: int, d: int) -> None:
    if mask < 0 or mask >> d:
        raise PreconditionError(f"subset mask {mask:#x} references a datum outside 0..{d - 1}")


# -- accumulation ---------------------------------------------------------


def stable_sum(terms: Iterable[float]) -> float:
    """Neumaier-compensated sum, accumulated in the given order.

    The JIT kernels use the identical update, so results agree bit for bit
    between backends.
    """
    s = 0.0
    c = 0.0
    for x in terms:
        x = float(x)
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def stable_mean(terms: Sequence[float]) -> float:
    n = len(terms)
    if n == 0:
        raise PreconditionError("mean of an empty list")
    return stable_sum(terms) / n


def stable_log_sum(terms: Sequence[float]) -> float:
    """``log(sum(exp(terms)))`` with a max shift.

    Returns ``-inf`` iff every term is ``-inf``.
    """
    if len(terms) == 0:
        raise PreconditionError("log-sum of an empty list")
    arr = np.asarray(terms, dtype=np.float64)
    if np.isnan(arr).any():
        raise ValueError("NaN log-probability")
    top = float(arr.max())
    if top == -math.inf:
        return -math.inf
    if top == math.inf:
        return math.inf
    return top + math.log(stable_sum(np.exp(arr - top).tolist()))


# -- units ----------------------------------------------------------------


def to_decibels(log_ratio: float) -> float:
    """Natural-log ratio to decibels (base ``10**(1/10)``)."""
    return log_ratio * DB_PER_NEPER


def from_decibels(db: float) -> float:
    return db / DB_PER_NEPER


# -- datasets -------------------------------------------------------------

VALUE_KINDS = ("binary", "categorical", "real")


def _infer_kind(values: np.ndarray) -> str:
    integral = bool(np.all(values == np.floor(values)))
    if integral and np.all((values == 0) | (values == 1)):
        return "binary"
    if integral and np.all(values >= 0):
        return "categorical"
    return "real"


@dataclass(frozen=True, eq=False, init=False)
class Dataset:
    """An ordered, immutable list of exchangeable scalar data.

    ``kind`` is inferred when not given: ``binary`` for all-0/1 data,
    ``categorical`` for non-negative integers, ``real`` otherwise.  The
    kinds nest (binary data are valid categorical labels, and any label is a
    real number), which lets one dataset be scored by hypotheses of
    different families.
    """

    values: np.ndarray
    kind: str
    d_max: int
    labels: np.ndarray | None = field(repr=False)

    def __init__(self, values, kind: str | None = None, d_max: int = D_MAX_DEFAULT):
        arr = np.array(values, dtype=np.float64).reshape(-1)
        if arr.size == 0:
            raise PreconditionError("dataset must hold at least one datum")
        if not np.all(np.isfinite(arr)):
            raise ModelDataMismatch("datum values must be finite")
        if not 1 <= d_max <= D_MAX_HARD:
            raise PreconditionError(f"d_max must lie in 1..{D_MAX_HARD}, got {d_max}")
        if arr.size > d_max:
            raise CapacityError(
                f"dataset holds {arr.size} data but the lattice cap is d_max={d_max}"
                + (f" (raise it up to {D_MAX_HARD})" if arr.size <= D_MAX_HARD else "")
            )
        inferred = _infer_kind(arr)
        if kind is None:
            kind = inferred
        elif kind not in VALUE_KINDS:
            raise ValueError(f"unknown datum kind {kind!r}")
        elif VALUE_KINDS.index(kind) < VALUE_KINDS.index(inferred):
            raise ModelDataMismatch(f"values are not all {kind}")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "d_max", d_max)
        if kind == "real":
            labels = None
        else:
            labels = arr.astype(np.int64)
            labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def d(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.d

    @property
    def full(self) -> int:
        return full_mask(self.d)

    def subset(self, mask: int) -> np.ndarray:
        check_mask(mask, self.d)
        return self.values[mask_indices(mask)]
