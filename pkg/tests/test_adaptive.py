"""Convergence-assessment truths and adaptive-driver contracts."""

import numpy as np
import pytest

from blbkit import (
    AdaptiveParams,
    DataMatrix,
    EstimatorSpec,
    MetricSpec,
    ProcedureConfig,
    RngStream,
    SummarySeries,
    ValidationError,
    has_converged,
    run_blb,
    run_blb_adaptive,
)

MEAN = EstimatorSpec("weighted_mean")
CI95 = MetricSpec("marginal_ci", 0.95)


class TestHasConverged:
    def test_constant_series_converges_at_window_plus_one(self):
        series = [np.array([3.7])] * 3
        assert not has_converged(series[:2], 2, 0.05)
        assert has_converged(series, 2, 0.05)

    def test_hand_example_within_epsilon(self):
        series = [np.array([1.0]), np.array([1.04]), np.array([1.0])]
        assert has_converged(series, 2, 0.05)

    def test_hand_example_beyond_epsilon(self):
        series = [np.array([1.0]), np.array([1.2]), np.array([1.0])]
        assert not has_converged(series, 2, 0.05)

    def test_short_series_never_converged(self):
        assert not has_converged([np.array([1.0])] * 4, 4, 0.5)

    def test_monotone_in_epsilon(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            t = int(rng.integers(2, 12))
            d = int(rng.integers(1, 4))
            series = [rng.standard_normal(d) for _ in range(t)]
            w = int(rng.integers(1, t))
            eps_small, eps_large = sorted(rng.random(2) + 1e-3)
            if has_converged(series, w, eps_small):
                assert has_converged(series, w, eps_large)

    def test_scale_equivariant(self):
        # Rescaling every series element by the same nonzero constant
        # leaves the decision unchanged (away from the denominator floor).
        rng = np.random.default_rng(1)
        for _ in range(200):
            t = int(rng.integers(2, 10))
            series = [rng.standard_normal(3) + 2.0 for _ in range(t)]
            w = int(rng.integers(1, t))
            eps = float(rng.random() + 1e-3)
            scale = float(rng.choice([-7.5, 0.01, 3.0, 1e6]))
            scaled = [scale * v for v in series]
            assert has_converged(series, w, eps) == has_converged(scaled, w, eps)

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            has_converged([np.array([1.0]), np.array([1.0, 2.0])], 1, 0.1)


class TestSummarySeries:
    def test_append_validates_dimension(self):
        series = SummarySeries()
        series.append([1.0, 2.0])
        with pytest.raises(ValidationError):
            series.append([1.0])

    def test_len(self):
        series = SummarySeries([[1.0], [2.0]])
        assert len(series) == 2


def gaussian_data(n, seed):
    return DataMatrix(RngStream(seed, ("data",)).generator.standard_normal((n, 1)))


class TestRunBlbAdaptive:
    def test_constant_estimator_stops_at_first_opportunity(self):
        # Constant data makes every summary identical: the inner loop
        # stops at exactly window_r + 1 resamples, the outer at
        # window_s + 1 subsamples.
        data = DataMatrix(np.full((200, 1), 2.0))
        params = AdaptiveParams(window_r=6, window_s=2, r_max=50, s_max=20)
        config = ProcedureConfig(gamma=0.5, seed=0, adaptive=params)
        summary, trajectory, report = run_blb_adaptive(data, MEAN, CI95, config)
        assert report.r_values == (7,) * 3
        assert report.s_selected == 3
        assert report.r_stop_reasons == ("converged",) * 3
        assert report.s_stop_reason == "converged"
        assert summary.lower == pytest.approx([2.0])

    def test_requires_adaptive_params(self):
        data = gaussian_data(100, 1)
        with pytest.raises(ValidationError):
            run_blb_adaptive(data, MEAN, CI95, ProcedureConfig(gamma=0.5, seed=0))

    def test_selected_r_within_bounds(self):
        data = gaussian_data(3000, 3)
        params = AdaptiveParams(window_r=10, r_max=60, window_s=2, s_max=10)
        config = ProcedureConfig(gamma=0.6, seed=5, adaptive=params)
        _, _, report = run_blb_adaptive(data, MEAN, CI95, config)
        for r_j in report.r_values:
            assert params.window_r + 1 <= r_j <= params.r_max
        assert report.s_selected <= params.s_max
        assert report.total_resamples == sum(report.r_values)

    def test_tiny_epsilon_reproduces_fixed_run(self):
        # An epsilon no float fluctuation can satisfy runs to the caps,
        # which must match run_blb with (s, r) = (s_max, r_max) bit for bit.
        data = gaussian_data(1200, 7)
        params = AdaptiveParams(
            epsilon_r=1e-300, epsilon_s=1e-300, window_r=3, window_s=2,
            r_max=25, s_max=4,
        )
        adaptive_cfg = ProcedureConfig(gamma=0.6, seed=9, adaptive=params)
        fixed_cfg = ProcedureConfig(gamma=0.6, s=4, r=25, seed=9)
        a_summary, _, report = run_blb_adaptive(data, MEAN, CI95, adaptive_cfg)
        f_summary, _ = run_blb(data, MEAN, CI95, fixed_cfg)
        assert report.r_values == (25, 25, 25, 25)
        assert report.s_stop_reason == "s_max"
        assert np.array_equal(a_summary.flatten(), f_summary.flatten())

    def test_worker_determinism(self):
        data = gaussian_data(2500, 11)
        params = AdaptiveParams(window_r=8, r_max=80, window_s=3, s_max=12)
        config = ProcedureConfig(gamma=0.6, seed=13, adaptive=params)
        results = {}
        for workers in (1, 2, 8):
            summary, _, report = run_blb_adaptive(
                data, MEAN, CI95, config, workers=workers
            )
            results[workers] = (summary.flatten(), report)
        assert np.array_equal(results[1][0], results[2][0])
        assert np.array_equal(results[1][0], results[8][0])
        assert results[1][1] == results[2][1] == results[8][1]

    def test_stderr_series_starts_at_two(self):
        data = DataMatrix(np.full((100, 1), 1.0))
        params = AdaptiveParams(window_r=4, window_s=1, r_max=30, s_max=5)
        config = ProcedureConfig(gamma=0.5, seed=1, adaptive=params)
        _, _, report = run_blb_adaptive(data, MEAN, MetricSpec("stderr"), config)
        # Constant data: series entries begin at the 2nd resample, so the
        # inner loop stops one resample later than the interval metric.
        assert report.r_values[0] == params.window_r + 2
