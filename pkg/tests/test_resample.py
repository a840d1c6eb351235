"""Randomness contracts: stream determinism, draw distributions, and
weighted-sample construction."""

import numpy as np
import pytest

from blbkit import (
    DataMatrix,
    IndexSubset,
    RngStream,
    SamplingError,
    ValidationError,
    draw_multinomial_counts,
    draw_partition,
    draw_poisson_counts,
    draw_subset,
    resample_classical,
    resample_weighted,
)


class TestRngStream:
    def test_same_seed_label_identical(self):
        a = RngStream(123, ("resample", 4, 7)).generator.random(32)
        b = RngStream(123, ("resample", 4, 7)).generator.random(32)
        assert np.array_equal(a, b)

    def test_distinct_labels_differ(self):
        a = RngStream(123, ("resample", 4, 7)).generator.random(8)
        b = RngStream(123, ("resample", 4, 8)).generator.random(8)
        assert not np.array_equal(a, b)

    def test_child_extends_label(self):
        parent = RngStream(5, ("x",))
        child = parent.child(3)
        assert child.label == ("x", 3)
        again = RngStream(5, ("x", 3))
        assert np.array_equal(child.generator.random(4), again.generator.random(4))

    def test_string_labels_stable(self):
        a = RngStream(0, ("truth",)).generator.random(4)
        b = RngStream(0, ("truth",)).generator.random(4)
        assert np.array_equal(a, b)

    def test_negative_label_part_rejected(self):
        with pytest.raises(ValidationError):
            RngStream(0, (-1,))


class TestDrawSubset:
    def test_full_subset_is_everything(self):
        subset = draw_subset(5, 5, RngStream(1))
        assert sorted(subset.indices) == [0, 1, 2, 3, 4]

    def test_cardinality_and_range(self):
        subset = draw_subset(10, 3, RngStream(2))
        assert subset.b == 3
        assert len(set(subset.indices)) == 3
        assert subset.indices.min() >= 0 and subset.indices.max() < 10

    def test_b_greater_than_n_rejected(self):
        with pytest.raises(ValidationError):
            draw_subset(3, 4, RngStream(0))

    def test_inclusion_frequency(self):
        # Each index is included with probability b/n = 0.3.
        rng = RngStream(7, ("inclusion",))
        hits = np.zeros(10)
        draws = 100_000
        for _ in range(draws):
            hits[draw_subset(10, 3, rng).indices] += 1
        freq = hits / draws
        assert np.all(np.abs(freq - 0.3) < 0.01)


class TestDrawPartition:
    def test_exact_division(self):
        parts = draw_partition(6, 2, RngStream(3))
        assert len(parts) == 3
        union = np.concatenate([p.indices for p in parts])
        assert sorted(union) == list(range(6))

    def test_remainder_discarded(self):
        parts = draw_partition(7, 2, RngStream(4))
        assert len(parts) == 3
        union = np.concatenate([p.indices for p in parts])
        assert len(union) == 6
        assert len(set(union)) == 6

    def test_disjoint_for_random_sizes(self):
        rng = RngStream(5, ("partition",))
        meta = np.random.default_rng(0)
        for _ in range(20):
            n = int(meta.integers(1, 200))
            b = int(meta.integers(1, n + 1))
            parts = draw_partition(n, b, rng.child(n, b))
            union = np.concatenate([p.indices for p in parts]) if parts else []
            assert len(union) == len(set(union)) == (n // b) * b


class TestMultinomialCounts:
    def test_single_category(self):
        assert draw_multinomial_counts(100, 1, RngStream(0)).tolist() == [100]

    def test_sum_is_n(self):
        counts = draw_multinomial_counts(20000, 1024, RngStream(1))
        assert counts.sum() == 20000
        assert counts.min() >= 0

    def test_marginal_moments(self):
        # Each count is Binomial(100, 1/4): mean 25, variance 18.75.
        rng = RngStream(11, ("moments",))
        draws = np.stack(
            [draw_multinomial_counts(100, 4, rng) for _ in range(50_000)]
        )
        first = draws[:, 0]
        assert abs(first.mean() - 25.0) < 0.5
        assert abs(first.var(ddof=1) - 18.75) < 1.0


class TestPoissonCounts:
    def test_zero_fraction_at_rate_one(self):
        # Poisson(1) puts mass exp(-1) at zero.
        rng = RngStream(13, ("poisson",))
        counts = np.concatenate(
            [draw_poisson_counts(100, 100, rng) for _ in range(500)]
        )
        frac = np.mean(counts == 0)
        assert abs(frac - np.exp(-1)) < 0.005

    def test_mean_at_rate_25(self):
        rng = RngStream(14, ("poisson",))
        draws = np.stack([draw_poisson_counts(100, 4, rng) for _ in range(50_000)])
        assert abs(draws[:, 0].mean() - 25.0) < 0.5

    def test_nonnegative_integers(self):
        counts = draw_poisson_counts(7, 3, RngStream(15))
        assert counts.dtype == np.int64
        assert counts.min() >= 0

    def test_degenerate_total_redraws_or_errors(self):
        # At rate 1/50 an all-zero draw is common; the contract is a
        # single redraw, then an error. Whenever counts come back the
        # total must be positive.
        saw_error = False
        saw_counts = False
        for seed in range(200):
            try:
                counts = draw_poisson_counts(1, 50, RngStream(seed, ("degenerate",)))
                assert counts.sum() >= 1
                saw_counts = True
            except SamplingError:
                saw_error = True
        assert saw_counts and saw_error


class TestResampleWeighted:
    def _data(self, n, p=2, seed=0):
        rng = RngStream(seed, ("data",))
        return DataMatrix(rng.generator.standard_normal((n, p)))

    def test_single_row_gets_all_weight(self):
        data = self._data(10)
        sample = resample_weighted(
            data, IndexSubset([4]), 50, "multinomial", RngStream(1)
        )
        assert sample.weights.tolist() == [50]
        assert sample.nominal_size == 50

    def test_multinomial_weights_sum_to_nominal(self):
        data = self._data(100)
        rng = RngStream(2, ("sum",))
        subset = draw_subset(100, 13, rng.child("subset"))
        for k in range(50):
            sample = resample_weighted(data, subset, 1000, "multinomial", rng.child(k))
            assert sample.weights.sum() == 1000

    def test_distinct_rows_bounded_by_b(self):
        data = self._data(200)
        rng = RngStream(3, ("distinct",))
        subset = draw_subset(200, 17, rng.child("subset"))
        for k in range(1000):
            sample = resample_weighted(data, subset, 200, "multinomial", rng.child(k))
            assert sample.distinct_count <= 17

    def test_poisson_nominal_is_realized_sum(self):
        data = self._data(50)
        subset = draw_subset(50, 10, RngStream(4))
        sample = resample_weighted(data, subset, 50, "poisson", RngStream(5))
        assert sample.nominal_size == sample.weights.sum()


class TestResampleClassical:
    def test_single_row(self):
        data = DataMatrix([[1.0]])
        sample = resample_classical(data, RngStream(0))
        assert sample.weights.tolist() == [1]

    def test_weights_sum_to_n(self):
        data = DataMatrix(RngStream(1).generator.standard_normal((500, 2)))
        rng = RngStream(2, ("classical",))
        for k in range(20):
            sample = resample_classical(data, rng.child(k))
            assert sample.weights.sum() == 500

    def test_distinct_fraction(self):
        # With-replacement resamples keep about 1 - 1/e of the rows.
        data = DataMatrix(RngStream(3).generator.standard_normal((10_000, 1)))
        rng = RngStream(4, ("fraction",))
        fractions = [
            resample_classical(data, rng.child(k)).distinct_count / 10_000
            for k in range(200)
        ]
        assert abs(np.mean(fractions) - 0.632) < 0.01


def test_order_independence_of_streams():
    # Drawing unit (2, 5) first or last gives the same counts.
    master = RngStream(99)
    early = draw_multinomial_counts(500, 20, master.child("resample", 2, 5))
    for j in range(3):
        for k in range(8):
            draw_multinomial_counts(500, 20, master.child("resample", j, k))
    late = draw_multinomial_counts(500, 20, master.child("resample", 2, 5))
    assert np.array_equal(early, late)
