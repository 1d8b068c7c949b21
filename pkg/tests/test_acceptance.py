"""Exit criteria, one test each; a PASS/FAIL line per criterion is printed in the summary."""
import io
import json
import math
import time
import tracemalloc

import numpy as np

from cvlattice import kernels
from cvlattice.cli import run
from cvlattice.core import Dataset
from cvlattice.evidence import HypothesisSet, nonrelative_bayes_factor, posterior, weight_of_evidence_db
from cvlattice.lattice import build_cache, loo_score, per_cardinality_scores, verify_identity
from cvlattice.models import BetaBernoulli, SimpleCategorical, count_evaluations

from oracles import KINDS, brute_per_cardinality, random_case

LN2 = math.log(2)


def test_c1_worked_example(record_criterion):
    h, data = BetaBernoulli(1, 1), Dataset([1, 0, 1])
    verify_identity(h, data, 1e-12)  # warm-up (JIT)
    best = math.inf
    for _ in range(20):
        t0 = time.perf_counter()
        r = verify_identity(h, data, 1e-12)
        loo = loo_score(build_cache(h, data)).value
        best = min(best, time.perf_counter() - t0)
    s = r.per_cardinality.scores
    checks = [
        abs(r.direct - math.log(1 / 12)) <= 1e-12,
        abs(loo - (-4 / 3 * LN2)) <= 1e-12,
        abs(s[1] - math.log(0.5)) <= 1e-12,
        abs(s[2] - math.log(2 / 27) / 3) <= 1e-12,
        abs(s[3] - (-4 / 3 * LN2)) <= 1e-12,
        abs(r.residual_compact) <= 1e-12,
        abs(r.residual_per_datum) <= 1e-12,
        best < 1e-3,
    ]
    ok = all(checks)
    record_criterion(1, "d=3 worked example", ok,
                     f"residuals={r.residual_compact:.1e}/{r.residual_per_datum:.1e} time={best * 1e3:.3f}ms")
    assert ok, checks


def test_c2_identity_property_suite(record_criterion):
    rng = np.random.default_rng(20260101)
    worst = 0.0
    failures = 0
    t0 = time.perf_counter()
    for kind in KINDS:
        for _ in range(200):
            h, data = random_case(kind, int(rng.integers(2, 13)), rng)
            r = verify_identity(h, data, 1e-9)
            res = max(abs(r.residual_compact), abs(r.residual_per_datum))
            worst = max(worst, res)
            failures += (not r.passed) or res > 1e-9
    elapsed = time.perf_counter() - t0
    ok = failures == 0 and elapsed < 30
    record_criterion(2, "identity on 5x200 random cases", ok, f"worst residual={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_c3_brute_force_equivalence(record_criterion):
    rng = np.random.default_rng(3)
    worst = 0.0
    t0 = time.perf_counter()
    for kind in KINDS:
        for _ in range(50):
            h, data = random_case(kind, int(rng.integers(1, 7)), rng)
            got = per_cardinality_scores(build_cache(h, data)).scores
            ref = brute_per_cardinality(h, list(data.values))
            worst = max(worst, max(abs(got[k] - ref[k]) for k in ref))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    record_criterion(3, "cache vs term-by-term enumeration, d<=6", ok, f"max diff={worst:.2e} time={elapsed:.2f}s")
    assert ok


def test_c4_simple_flatness(record_criterion):
    rng = np.random.default_rng(4)
    worst = 0.0
    for i in range(50):
        kind = ("SimpleCategorical", "SimpleGaussian")[i % 2]
        h, data = random_case(kind, int(rng.integers(2, 13)), rng)
        rows = list(per_cardinality_scores(build_cache(h, data)).scores.values())
        worst = max(worst, max(rows) - min(rows))
    ok = worst <= 1e-12
    record_criterion(4, "simple hypotheses give flat S_k", ok, f"max spread={worst:.2e}")
    assert ok


def _odds_route(hset, data, h):
    post = posterior(hset, data)[h]
    prior = hset.priors[h]
    return (math.log(post) - math.log1p(-post)) - (math.log(prior) - math.log1p(-prior))


def test_c5_odds_route(record_criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(100):
        hs = []
        for j in range(3):
            if rng.random() < 0.5:
                p = rng.uniform(0.1, 0.9)
                hs.append(SimpleCategorical((1 - p, p), name=f"h{j}"))
            else:
                hs.append(BetaBernoulli(rng.uniform(0.3, 4), rng.uniform(0.3, 4), name=f"h{j}"))
        priors = rng.dirichlet(np.ones(3)) * 0.9 + 0.1 / 3
        priors[-1] = 1.0 - priors[:-1].sum()
        hset = HypothesisSet(tuple(hs), tuple(priors))
        data = Dataset((rng.random(int(rng.integers(1, 9))) < rng.uniform(0.1, 0.9)).astype(int), kind="binary")
        for h in range(3):
            worst = max(worst, abs(nonrelative_bayes_factor(hset, h, data) - _odds_route(hset, data, h)))
    ok = worst <= 1e-10
    record_criterion(5, "non-relative Bayes factor equals posterior/prior odds", ok, f"max diff={worst:.2e}")
    assert ok


def test_c6_expected_weight_of_evidence(record_criterion):
    rng = np.random.default_rng(6)
    a = SimpleCategorical((0.2, 0.8), name="A")
    b = SimpleCategorical((0.5, 0.5), name="B")
    hset = HypothesisSet((a, b), (0.5, 0.5))
    t0 = time.perf_counter()
    woe = np.array([
        weight_of_evidence_db(nonrelative_bayes_factor(hset, 0, Dataset((rng.random(10) < 0.8).astype(int), kind="binary")))
        for _ in range(2000)
    ])
    elapsed = time.perf_counter() - t0
    t_stat = woe.mean() / (woe.std(ddof=1) / math.sqrt(woe.size))
    ok = woe.mean() > 0 and t_stat > 3 and elapsed < 10
    record_criterion(6, "mean weight of evidence for the true hypothesis > 0", ok,
                     f"mean={woe.mean():.3f}dB t={t_stat:.1f} time={elapsed:.2f}s")
    assert ok


def test_c7_scale_d20(record_criterion):
    rng = np.random.default_rng(7)
    h = BetaBernoulli(1.5, 2.0)
    data = Dataset(rng.integers(0, 2, 20), kind="binary")
    verify_identity(h, Dataset([1, 0, 1]))  # warm-up (JIT)
    tracemalloc.start()
    try:
        t0 = time.perf_counter()
        with count_evaluations() as counter:
            r = verify_identity(h, data)
        elapsed = time.perf_counter() - t0
        peak = tracemalloc.get_traced_memory()[1]
    finally:
        tracemalloc.stop()
    ok = r.passed and elapsed < 10 and peak < 256 * 2**20 and counter.count == 2**20 - 1
    record_criterion(7, "d=20 verification", ok,
                     f"backend={kernels.BACKEND} time={elapsed:.2f}s peak={peak / 2**20:.0f}MB evals={counter.count}")
    assert ok


def test_c8_thread_determinism(record_criterion, tmp_path):
    rng = np.random.default_rng(8)
    data = tmp_path / "data.json"
    data.write_text(json.dumps(rng.normal(size=14).tolist()))
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps({"hypotheses": [
        {"name": "nkv", "kind": "NormalKnownVariance", "params": {"variance": 0.8, "prior_mean": 0.0, "prior_variance": 3.0}},
        {"name": "std", "kind": "SimpleGaussian", "params": {"mean": 0.1, "sd": 1.2}},
    ]}))
    outs = []
    for threads in ("1", "8"):
        buf = io.StringIO()
        code = run(["verify", "--data", str(data), "--config", str(cfg), "--format", "json", "--threads", threads],
                   buf, io.StringIO())
        outs.append((code, buf.getvalue().encode()))
    ok = outs[0][0] == outs[1][0] == 0 and outs[0][1] == outs[1][1]
    record_criterion(8, "verify JSON identical for 1 and 8 threads", ok, f"{len(outs[0][1])} bytes")
    assert ok
