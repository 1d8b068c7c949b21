import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cvlattice.core import (
    CapacityError,
    Dataset,
    ModelDataMismatch,
    PreconditionError,
    cardinality,
    from_decibels,
    full_mask,
    mask_from_indices,
    mask_indices,
    stable_log_sum,
    stable_mean,
    stable_sum,
    to_decibels,
)


class TestCardinality:
    def test_empty(self):
        assert cardinality(0) == 0

    def test_full_d3(self):
        assert cardinality(full_mask(3)) == 3

    def test_pair(self):
        # data 1 and 3 of 3 (1-based) -> bits 0 and 2
        assert cardinality(mask_from_indices([0, 2])) == 2

    @given(st.integers(0, 2**12 - 1), st.integers(0, 2**12 - 1))
    def test_subset_monotone(self, a, b):
        sub, sup = a & b, a | b
        assert cardinality(sub) <= cardinality(a) <= cardinality(sup)

    @given(st.lists(st.integers(0, 25), unique=True))
    def test_indices_roundtrip(self, idx):
        assert mask_indices(mask_from_indices(idx)) == sorted(idx)


class TestStableLogSum:
    def test_halves(self):
        assert stable_log_sum([math.log(0.5), math.log(0.5)]) == pytest.approx(0.0, abs=1e-15)

    def test_singleton(self):
        assert stable_log_sum([-3.7]) == -3.7

    def test_tenths(self):
        # oracle: plain linear-space sum is accurate at this scale
        expected = math.log(sum([0.1] * 10))
        assert stable_log_sum([math.log(0.1)] * 10) == pytest.approx(expected, abs=1e-14)
        assert abs(stable_log_sum([math.log(0.1)] * 10)) < 1e-14

    def test_all_neg_inf(self):
        assert stable_log_sum([-math.inf, -math.inf]) == -math.inf

    def test_some_neg_inf(self):
        assert stable_log_sum([-math.inf, math.log(0.25)]) == pytest.approx(math.log(0.25))

    def test_no_overflow(self):
        assert stable_log_sum([-1000.0, -1000.0]) == pytest.approx(-1000.0 + math.log(2.0))

    def test_empty(self):
        with pytest.raises(PreconditionError):
            stable_log_sum([])

    @given(st.lists(st.floats(-50, 0), min_size=1, max_size=30), st.randoms())
    def test_permutation_invariant(self, xs, rnd):
        ys = list(xs)
        rnd.shuffle(ys)
        assert abs(stable_log_sum(xs) - stable_log_sum(ys)) <= 1e-12


class TestStableMean:
    def test_constant(self):
        assert stable_mean([0.3, 0.3, 0.3]) == pytest.approx(0.3, abs=1e-16)

    def test_exact(self):
        assert stable_mean([1.0, 2.0, 3.0]) == 2.0

    def test_million_tenths(self):
        n = 10**6
        # exact rational mean of n copies of the double nearest 0.1
        exact = Fraction(0.1) * n / n
        got = stable_mean([0.1] * n)
        assert abs(Fraction(got) - exact) < Fraction(1, 10**12)
        assert abs(got - 0.1) < 1e-12

    def test_compensation_beats_naive(self):
        xs = [1.0, 1e100, 1.0, -1e100]
        assert stable_sum(xs) == 2.0

    def test_empty(self):
        with pytest.raises(PreconditionError):
            stable_mean([])


class TestDecibels:
    def test_ln10(self):
        assert to_decibels(math.log(10)) == pytest.approx(10.0, rel=1e-15)

    @given(st.floats(-700, 700).filter(lambda x: abs(x) > 1e-300))
    def test_roundtrip(self, x):
        assert abs(from_decibels(to_decibels(x)) - x) <= 1e-12 * abs(x)

    @given(st.floats(1e-300, 1.0), st.floats(1e-300, 1.0))
    def test_matches_log10(self, p, q):
        db = to_decibels(math.log(p) - math.log(q))
        assert db == pytest.approx(10 * (math.log10(p) - math.log10(q)), rel=1e-12, abs=1e-12)


class TestDataset:
    def test_kind_inference(self):
        assert Dataset([1, 0, 1]).kind == "binary"
        assert Dataset([2, 0, 1]).kind == "categorical"
        assert Dataset([0.5, 1.0]).kind == "real"
        assert Dataset([-1, 2]).kind == "real"

    def test_explicit_kind_widening(self):
        assert Dataset([1, 0], kind="real").kind == "real"
        with pytest.raises(ModelDataMismatch):
            Dataset([0.5], kind="binary")

    def test_immutable(self):
        data = Dataset([1, 0, 1])
        with pytest.raises(ValueError):
            data.values[0] = 0.0
        with pytest.raises(AttributeError):
            data.kind = "real"

    def test_rejects_non_finite(self):
        with pytest.raises(ModelDataMismatch):
            Dataset([1.0, math.nan])
        with pytest.raises(ModelDataMismatch):
            Dataset([math.inf])

    def test_capacity(self):
        Dataset(np.zeros(20))
        with pytest.raises(CapacityError):
            Dataset(np.zeros(21))
        assert Dataset(np.zeros(21), d_max=26).d == 21
        with pytest.raises(PreconditionError):
            Dataset(np.zeros(3), d_max=27)

    def test_empty(self):
        with pytest.raises(PreconditionError):
            Dataset([])
