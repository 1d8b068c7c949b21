"""Predictive models with closed-form log marginal likelihoods.

A model only has to say how to turn data into additive sufficient
statistics (``encode``) and how to evaluate the log marginal likelihood of
a batch of subsets from their statistics (``log_marginal_stats``).  Every
conditional predictive used downstream is a difference of two marginals.

New kinds register with :func:`register` and become available to the
config loader by their ``kind`` string.
"""
from __future__ import annotations

import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import ClassVar

import numpy as np
from scipy.special import betaln, gammaln

from .core import (
    Dataset,
    ModelDataMismatch,
    PreconditionError,
    ZeroProbabilityError,
    check_mask,
    mask_indices,
)

LOG_2PI = math.log(2.0 * math.pi)

MODEL_KINDS: dict[str, type[Hypothesis]] = {}


def register(cls):
    MODEL_KINDS[cls.kind] = cls
    return cls


class Hypothesis:
    """Base class for model kinds.  Subclasses are frozen dataclasses."""

    kind: ClassVar[str] = ""
    simple: ClassVar[bool] = False
    discrete: ClassVar[bool] = True
    name: str

    def check(self, data: Dataset) -> None:
        raise NotImplementedError

    def encode(self, data: Dataset) -> np.ndarray:
        """Per-datum sufficient statistics, shape ``(d, p)``; subsets add rows."""
        raise NotImplementedError

    def log_marginal_stats(self, n: np.ndarray, stats: np.ndarray) -> np.ndarray:
        """Log marginal likelihood of subsets with sizes ``n`` and summed ``stats``."""
        raise NotImplementedError


def _positive(name, value):
    value = float(value)
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be finite and > 0, got {value}")
    return value


def _finite(name, value):
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


def _check_labels(h, data: Dataset, k: int) -> None:
    if data.kind == "real":
        raise ModelDataMismatch(f"{h.kind} {h.name!r} needs integer category labels, got real data")
    top = int(data.labels.max())
    if top >= k:
        raise ModelDataMismatch(
            f"{h.kind} {h.name!r} declares {k} categories but the data hold label {top}"
        )


def _one_hot(labels: np.ndarray, k: int) -> np.ndarray:
    out = np.zeros((labels.size, k))
    out[np.arange(labels.size), labels] = 1.0
    return out


@register
@dataclass(frozen=True)
class SimpleCategorical(Hypothesis):
    """I.i.d. labels from a fixed probability table."""

    probs: tuple[float, ...]
    name: str = "SimpleCategorical"

    kind: ClassVar[str] = "SimpleCategorical"
    simple: ClassVar[bool] = True

    def __post_init__(self):
        p = tuple(float(x) for x in self.probs)
        if len(p) < 1 or any(not math.isfinite(x) or x < 0 for x in p):
            raise ValueError("probs must be non-negative and finite")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValueError(f"probs must sum to 1 within 1e-12, got {math.fsum(p)!r}")
        object.__setattr__(self, "probs", p)

    def check(self, data):
        _check_labels(self, data, len(self.probs))

    def encode(self, data):
        return _one_hot(data.labels, len(self.probs))

    def log_marginal_stats(self, n, stats):
        out = np.zeros(stats.shape[0])
        for k, p in enumerate(self.probs):
            counts = stats[:, k]
            if p > 0:
                out += counts * math.log(p)
            else:
                out[counts > 0] = -np.inf
        return out


@register
@dataclass(frozen=True)
class SimpleGaussian(Hypothesis):
    """I.i.d. normal data with fixed mean and standard deviation."""

    mean: float
    sd: float
    name: str = "SimpleGaussian"

    kind: ClassVar[str] = "SimpleGaussian"
    simple: ClassVar[bool] = True
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "mean", _finite("mean", self.mean))
        object.__setattr__(self, "sd", _positive("sd", self.sd))

    def check(self, data):
        pass

    def encode(self, data):
        z = (data.values - self.mean) / self.sd
        return (z * z)[:, None]

    def log_marginal_stats(self, n, stats):
        per_datum = 0.5 * LOG_2PI + math.log(self.sd)
        return -(n * per_datum) - 0.5 * stats[:, 0]


@register
@dataclass(frozen=True)
class BetaBernoulli(Hypothesis):
    """Bernoulli data with a Beta(alpha, beta) prior on the success rate."""

    alpha: float
    beta: float
    name: str = "BetaBernoulli"

    kind: ClassVar[str] = "BetaBernoulli"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _positive("alpha", self.alpha))
        object.__setattr__(self, "beta", _positive("beta", self.beta))

    def check(self, data):
        if data.kind != "binary":
            raise ModelDataMismatch(f"BetaBernoulli {self.name!r} needs 0/1 data, got {data.kind}")

    def encode(self, data):
        return data.values[:, None].copy()

    def log_marginal_stats(self, n, stats):
        s = stats[:, 0]
        return betaln(self.alpha + s, self.beta + (n - s)) - betaln(self.alpha, self.beta)


@register
@dataclass(frozen=True)
class DirichletCategorical(Hypothesis):
    """Categorical labels with a Dirichlet prior on the category probabilities."""

    concentration: tuple[float, ...]
    name: str = "DirichletCategorical"

    kind: ClassVar[str] = "DirichletCategorical"

    def __post_init__(self):
        a = tuple(_positive("concentration", x) for x in self.concentration)
        if not a:
            raise ValueError("concentration must have at least one entry")
        object.__setattr__(self, "concentration", a)

    def check(self, data):
        _check_labels(self, data, len(self.concentration))

    def encode(self, data):
        return _one_hot(data.labels, len(self.concentration))

    def log_marginal_stats(self, n, stats):
        total = math.fsum(self.concentration)
        out = gammaln(total) - gammaln(total + n)
        for k, a in enumerate(self.concentration):
            out += gammaln(a + stats[:, k]) - gammaln(a)
        return out


@register
@dataclass(frozen=True)
class NormalKnownVariance(Hypothesis):
    """Normal data of known variance; normal prior on the unknown mean."""

    variance: float
    prior_mean: float
    prior_variance: float
    name: str = "NormalKnownVariance"

    kind: ClassVar[str] = "NormalKnownVariance"
    discrete: ClassVar[bool] = False

    def __post_init__(self):
        object.__setattr__(self, "variance", _positive("variance", self.variance))
        object.__setattr__(self, "prior_mean", _finite("prior_mean", self.prior_mean))
        object.__setattr__(self, "prior_variance", _positive("prior_variance", self.prior_variance))

    def check(self, data):
        pass

    def encode(self, data):
        r = data.values - self.prior_mean
        return np.column_stack([r, r * r])

    def log_marginal_stats(self, n, stats):
        s2, v = self.variance, self.prior_variance
        s1, ss = stats[:, 0], stats[:, 1]
        return (
            -0.5 * n * (LOG_2PI + math.log(s2))
            - 0.5 * np.log1p(n * v / s2)
            - ss / (2.0 * s2)
            + v * s1 * s1 / (2.0 * s2 * (s2 + n * v))
        )


def hypothesis_from_spec(kind: str, params: dict, name: str | None = None) -> Hypothesis:
    try:
        cls = MODEL_KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown hypothesis kind {kind!r}; known: {sorted(MODEL_KINDS)}") from None
    params = dict(params)
    if name is not None:
        params["name"] = name
    try:
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for {kind}: {exc}") from None


# -- evaluation counting --------------------------------------------------


class EvaluationCounter:
    def __init__(self):
        self.count = 0


_counters: list[EvaluationCounter] = []
_counter_lock = threading.Lock()


@contextmanager
def count_evaluations():
    """Count closed-form marginal evaluations made inside the block."""
    counter = EvaluationCounter()
    with _counter_lock:
        _counters.append(counter)
    try:
        yield counter
    finally:
        with _counter_lock:
            _counters.remove(counter)


def evaluate(h: Hypothesis, n: np.ndarray, stats: np.ndarray) -> np.ndarray:
    out = h.log_marginal_stats(n, stats)
    if _counters:
        with _counter_lock:
            for c in _counters:
                c.count += int(n.shape[0])
    return out


# -- subset marginals -----------------------------------------------------


def log_marginal(h: Hypothesis, subset: int, data: Dataset) -> float:
    """log P(data restricted to ``subset`` | h); 0 for the empty subset."""
    check_mask(subset, data.d)
    h.check(data)
    idx = mask_indices(subset)
    if not idx:
        return 0.0
    enc = h.encode(data)
    acc = np.zeros(enc.shape[1])
    for i in idx:  # ascending, as in the lattice traversal
        acc = acc + enc[i]
    return float(evaluate(h, np.array([float(len(idx))]), acc[None, :])[0])


def log_predictive(h: Hypothesis, i: int, given: int, data: Dataset) -> float:
    """log P(datum i | data in ``given``, h) as a difference of marginals."""
    if not 0 <= i < data.d:
        raise PreconditionError(f"datum index {i} outside 0..{data.d - 1}")
    if given >> i & 1:
        raise PreconditionError(f"datum {i} is already in the conditioning subset")
    base = log_marginal(h, given, data)
    if base == -math.inf:
        raise ZeroProbabilityError(f"conditioning subset {given:#x} has probability zero")
    return log_marginal(h, given | (1 << i), data) - base
