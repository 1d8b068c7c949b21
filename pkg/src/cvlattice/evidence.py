"""Comparing hypotheses: posteriors, Bayes factors and weights of evidence.

The hypothesis set is assumed mutually exclusive and exhaustive.  That
cannot be checked; only its numerical consequence (priors sum to one) is
enforced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import Dataset, DegenerateEvidenceError, PreconditionError, stable_log_sum, stable_sum, to_decibels
from .models import Hypothesis, log_marginal


@dataclass(frozen=True)
class HypothesisSet:
    hypotheses: tuple[Hypothesis, ...]
    priors: tuple[float, ...]

    def __post_init__(self):
        hs = tuple(self.hypotheses)
        ps = tuple(float(p) for p in self.priors)
        if not hs:
            raise PreconditionError("hypothesis set is empty")
        if len(hs) != len(ps):
            raise PreconditionError(f"{len(hs)} hypotheses but {len(ps)} priors")
        if any(not math.isfinite(p) or p < 0 for p in ps):
            raise PreconditionError("priors must be finite and >= 0")
        total = math.fsum(ps)
        if abs(total - 1.0) > 1e-12:
            raise PreconditionError(f"priors must sum to 1 within 1e-12, got {total!r}")
        object.__setattr__(self, "hypotheses", hs)
        object.__setattr__(self, "priors", ps)

    def __len__(self):
        return len(self.hypotheses)

    def log_likelihoods(self, data: Dataset) -> list[float]:
        return [log_marginal(h, data.full, data) for h in self.hypotheses]


def _log(p: float) -> float:
    return math.log(p) if p > 0 else -math.inf


def posteriors_from_log_likelihoods(log_liks: Sequence[float], priors: Sequence[float]) -> list[float]:
    joint = [ll + _log(p) if p > 0 else -math.inf for ll, p in zip(log_liks, priors)]
    top = max(joint)
    if top == -math.inf:
        raise DegenerateEvidenceError("every hypothesis with positive prior gives the data probability zero")
    weights = [math.exp(j - top) for j in joint]
    total = stable_sum(weights)
    return [w / total for w in weights]


def posterior(hset: HypothesisSet, data: Dataset) -> list[float]:
    return posteriors_from_log_likelihoods(hset.log_likelihoods(data), hset.priors)


def relative_bayes_factor(a: Hypothesis, b: Hypothesis, data: Dataset) -> float:
    """log P(D | a) - log P(D | b)."""
    la = log_marginal(a, data.full, data)
    lb = log_marginal(b, data.full, data)
    if la == lb == -math.inf:
        raise DegenerateEvidenceError("both hypotheses give the data probability zero")
    return la - lb


def nonrelative_from_log_likelihoods(log_liks: Sequence[float], priors: Sequence[float], h: int) -> float:
    """log of P(D | H_h) / P(D | not H_h), the alternatives weighted by their priors."""
    if len(log_liks) < 2:
        raise PreconditionError("need at least 2 hypotheses")
    p = priors[h]
    if not 0.0 < p < 1.0:
        raise PreconditionError(f"prior of hypothesis {h} must lie strictly in (0, 1), got {p}")
    rest = [ll + _log(q) if q > 0 else -math.inf for j, (ll, q) in enumerate(zip(log_liks, priors)) if j != h]
    den = stable_log_sum(rest)
    if den == -math.inf:
        raise DegenerateEvidenceError("the alternatives give the data probability zero")
    return log_liks[h] + math.log1p(-p) - den


def nonrelative_bayes_factor(hset: HypothesisSet, h: int, data: Dataset) -> float:
    return nonrelative_from_log_likelihoods(hset.log_likelihoods(data), hset.priors, h)


def weight_of_evidence_db(log_bayes_factor: float) -> float:
    if not math.isfinite(log_bayes_factor):
        raise ValueError(f"weight of evidence needs a finite log Bayes factor, got {log_bayes_factor}")
    return to_decibels(log_bayes_factor)


@dataclass(frozen=True)
class HypothesisEvidence:
    name: str
    prior: float
    log_likelihood: float
    posterior: float
    log_bayes_factor: float | None
    weight_of_evidence_db: float | None


@dataclass(frozen=True)
class EvidenceReport:
    entries: tuple[HypothesisEvidence, ...]
    pairwise: tuple[tuple[float | None, ...], ...]
    """``pairwise[a][b]`` is log P(D|a) - log P(D|b); None when not finite."""

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def _finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None


def compare(hset: HypothesisSet, data: Dataset) -> EvidenceReport:
    if len(hset) < 2:
        raise PreconditionError("comparison needs at least 2 hypotheses")
    lls = hset.log_likelihoods(data)
    posts = posteriors_from_log_likelihoods(lls, hset.priors)
    entries = []
    for i, (h, p) in enumerate(zip(hset.hypotheses, hset.priors)):
        try:
            lbf = nonrelative_from_log_likelihoods(lls, hset.priors, i)
        except (PreconditionError, DegenerateEvidenceError):
            lbf = None
        woe = to_decibels(lbf) if lbf is not None and math.isfinite(lbf) else None
        if lbf is not None and not math.isfinite(lbf):
            lbf = None
        entries.append(HypothesisEvidence(h.name, p, lls[i], posts[i], lbf, woe))
    pairwise = tuple(tuple(_finite_or_none(a - b) for b in lls) for a in lls)
    return EvidenceReport(tuple(entries), pairwise)
