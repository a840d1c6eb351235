"""Generator distribution checks, ground-truth oracle, relative error,
and experiment orchestration plumbing."""

import numpy as np
import pytest

from blbkit import (
    DataGeneratingSpec,
    DataMatrix,
    EstimatorSpec,
    GroundTruth,
    MetricSpec,
    ProcedureConfig,
    ProcedureSetup,
    QualitySummary,
    RngStream,
    ValidationError,
    ci_widths,
    compute_ground_truth,
    generate,
    relative_error,
    run_experiment,
    run_grid,
)

MEAN = EstimatorSpec("weighted_mean")
CI95 = MetricSpec("marginal_ci", 0.95)


class TestGenerate:
    def test_zero_coefficient_classification_is_fair_coin(self):
        spec = DataGeneratingSpec(task="classification", d=1, coefficients=(0.0,))
        data = generate(spec, 1_000_000, RngStream(0, ("gen",)))
        assert abs(data.response.mean() - 0.5) < 0.002

    def test_student_t_median_near_zero(self):
        spec = DataGeneratingSpec(
            task="regression", d=1, feature_dist="student_t", df=3.0
        )
        data = generate(spec, 1_000_000, RngStream(1, ("gen",)))
        assert abs(np.median(data.features)) < 0.01

    def test_vanishing_noise_recovers_linear_map(self):
        spec = DataGeneratingSpec(task="regression", d=3, noise_sd=1e-12)
        data = generate(spec, 500, RngStream(2, ("gen",)))
        predicted = data.features @ spec.beta
        np.testing.assert_allclose(data.response, predicted, atol=1e-9)

    def test_scaled_link_divides_by_sqrt_d(self):
        spec_raw = DataGeneratingSpec(task="regression", d=4, noise_sd=1e-12)
        spec_scaled = DataGeneratingSpec(
            task="regression", d=4, noise_sd=1e-12, link="linear_scaled_by_sqrt_d"
        )
        raw = generate(spec_raw, 100, RngStream(3, ("gen",)))
        scaled = generate(spec_scaled, 100, RngStream(3, ("gen",)))
        np.testing.assert_allclose(scaled.response * 2.0, raw.response, atol=1e-8)

    def test_gamma_features_are_positive(self):
        spec = DataGeneratingSpec(
            task="regression", d=2, feature_dist="gamma",
            gamma_shape=2.0, gamma_scale=0.5,
        )
        data = generate(spec, 1000, RngStream(4, ("gen",)))
        assert data.features.min() > 0

    def test_invalid_specs(self):
        with pytest.raises(ValidationError):
            DataGeneratingSpec(task="classification", d=0)
        with pytest.raises(ValidationError):
            DataGeneratingSpec(task="regression", d=1, noise_sd=0.0)
        with pytest.raises(ValidationError):
            DataGeneratingSpec(task="classification", d=2,
                               feature_dist="student_t", df=2.0)
        with pytest.raises(ValidationError):
            DataGeneratingSpec(task="classification", d=2, coefficients=(1.0,))


class TestGroundTruth:
    def test_analytic_width_for_gaussian_mean(self):
        spec = DataGeneratingSpec(task="regression", d=1, coefficients=(0.0,))
        # Features are standard normal; the mean's sampling distribution
        # has sd 1/sqrt(n), so the 95% band is 3.92/sqrt(n) wide. The
        # 2000-realization width carries ~2% quantile noise (1 sigma);
        # the seed pins a typical draw.
        truth = compute_ground_truth(
            spec, 10_000, 2000, MEAN, CI95, RngStream(6, ("truth",)), workers=8
        )
        width = float(np.mean(ci_widths(truth.summary)))
        analytic = 2 * 1.96 / np.sqrt(10_000)
        assert abs(width - analytic) / analytic < 0.05

    def test_pooled_ensemble_size(self):
        spec = DataGeneratingSpec(task="regression", d=2)
        truth = compute_ground_truth(
            spec, 50, 7, EstimatorSpec("least_squares"), CI95,
            RngStream(6, ("truth",)),
        )
        assert truth.num_realizations == 7

    def test_two_realizations_bracket_the_estimates(self):
        data_spec = DataGeneratingSpec(task="regression", d=1, noise_sd=1e-12)
        truth = compute_ground_truth(
            data_spec, 5000, 2, MEAN, CI95, RngStream(7, ("truth",))
        )
        assert truth.num_realizations == 2
        # The pooled ensemble has exactly two estimates; the interpolated
        # interval must sit strictly inside their range.
        assert truth.summary.upper[0] - truth.summary.lower[0] < 2 / np.sqrt(5000)

    def test_minimum_realizations(self):
        spec = DataGeneratingSpec(task="regression", d=1)
        with pytest.raises(ValidationError):
            compute_ground_truth(spec, 10, 1, MEAN, CI95, RngStream(8))


class TestRelativeError:
    def test_width_deviation(self):
        est = QualitySummary.intervals([0.0], [1.1], 0.95)
        truth = QualitySummary.intervals([0.05], [1.05], 0.95)
        assert relative_error(est, truth) == pytest.approx(0.1)

    def test_identity_is_zero(self):
        s = QualitySummary.scalars([0.3, 0.4])
        assert relative_error(s, s) == 0.0

    def test_mean_across_dimensions(self):
        est = QualitySummary.intervals([0.0, 0.0], [1.2, 0.8], 0.95)
        truth = QualitySummary.intervals([0.0, 0.0], [1.0, 1.0], 0.95)
        assert relative_error(est, truth) == pytest.approx(0.2)

    def test_scale_invariance(self):
        est = QualitySummary.scalars([0.3, 0.5])
        truth = QualitySummary.scalars([0.25, 0.55])
        scaled_est = QualitySummary.scalars([3.0, 5.0])
        scaled_truth = QualitySummary.scalars([2.5, 5.5])
        assert relative_error(est, truth) == pytest.approx(
            relative_error(scaled_est, scaled_truth)
        )

    def test_zero_truth_component_rejected(self):
        est = QualitySummary.scalars([0.3])
        truth = QualitySummary.scalars([0.0])
        with pytest.raises(ValidationError):
            relative_error(est, truth)

    def test_shape_mismatch(self):
        with pytest.raises(ValidationError):
            relative_error(QualitySummary.scalars([1.0]),
                           QualitySummary.scalars([1.0, 2.0]))


def _tiny_truth():
    spec = DataGeneratingSpec(task="regression", d=1, coefficients=(0.0,))
    truth = compute_ground_truth(
        spec, 400, 200, MEAN, CI95, RngStream(9, ("truth",)), workers=4
    )
    return spec, truth


class TestRunExperiment:
    def test_single_cell_plumbing(self):
        spec, truth = _tiny_truth()
        cells = [ProcedureSetup("boot", "bootstrap", ProcedureConfig(r=12))]
        report = run_experiment(
            spec, 400, cells, MEAN, CI95, truth, 1, RngStream(10, ("exp",))
        )
        assert len(report.cells) == 1
        cell = report.cells[0]
        assert cell.error is None
        assert len(cell.steps) == 12
        assert cell.mean_final_error == pytest.approx(cell.steps[-1][1])
        assert all(err >= 0 for _, err in cell.steps)

    def test_step_counts_preserved_across_realizations(self):
        spec, truth = _tiny_truth()
        cells = [
            ProcedureSetup("blb", "blb", ProcedureConfig(gamma=0.6, s=4, r=10)),
            ProcedureSetup("subs", "subsampling", ProcedureConfig(gamma=0.6, r=15)),
        ]
        report = run_experiment(
            spec, 400, cells, MEAN, CI95, truth, 3, RngStream(11, ("exp",))
        )
        by_label = {c.label: c for c in report.cells}
        assert len(by_label["blb"].steps) == 4
        assert len(by_label["subs"].steps) == 15
        assert len(by_label["blb"].final_errors) == 3

    def test_failing_cell_recorded_not_fatal(self):
        # Rank-deficient least squares fails in every cell; the report
        # records the failures instead of raising.
        spec = DataGeneratingSpec(task="regression", d=1, coefficients=(0.0,))
        truth_summary = QualitySummary.intervals([-0.1], [0.1], 0.95)
        truth = GroundTruth(truth_summary, 2, 400)
        cells = [
            ProcedureSetup("bad", "blb", ProcedureConfig(gamma=0.6, s=2, r=5)),
            ProcedureSetup("also-bad", "bootstrap", ProcedureConfig(r=5)),
        ]
        report = run_experiment(
            spec, 400, cells, EstimatorSpec("logistic_newton"), CI95, truth, 1,
            RngStream(12, ("exp",)),
        )
        assert all(cell.error is not None for cell in report.cells)
        assert all("requires" in cell.error or "Newton" in cell.error
                   for cell in report.cells)

    def test_truth_n_mismatch(self):
        spec, truth = _tiny_truth()
        with pytest.raises(ValidationError):
            run_experiment(spec, 500, [], MEAN, CI95, truth, 1, RngStream(13))

    def test_determinism(self):
        spec, truth = _tiny_truth()
        cells = [ProcedureSetup("blb", "blb", ProcedureConfig(gamma=0.6, s=3, r=8))]
        a = run_experiment(spec, 400, cells, MEAN, CI95, truth, 2,
                           RngStream(14, ("exp",)), workers=1)
        b = run_experiment(spec, 400, cells, MEAN, CI95, truth, 2,
                           RngStream(14, ("exp",)), workers=8)
        assert a.cells[0].final_errors == b.cells[0].final_errors


class TestRunGrid:
    def test_grid_shape_and_prefix_consistency(self):
        spec, truth = _tiny_truth()
        grid = run_grid(
            spec, 400, ProcedureConfig(gamma=0.6), [2, 5, 10], [1, 2, 4],
            MEAN, CI95, truth, 2, RngStream(15, ("grid",)), workers=4,
        )
        assert grid.errors.shape == (3, 3)
        assert np.all(grid.errors >= 0)
        assert grid.r_values == (2, 5, 10)
        assert grid.s_values == (1, 2, 4)

    def test_error_at_lookup(self):
        spec, truth = _tiny_truth()
        grid = run_grid(
            spec, 400, ProcedureConfig(gamma=0.6), [2, 4], [1, 2],
            MEAN, CI95, truth, 1, RngStream(16, ("grid",)),
        )
        assert grid.error_at(4, 2) == pytest.approx(grid.errors[1, 1])
