"""Synthetic evaluation harness: data generators with a known underlying
distribution, a many-realization ground-truth oracle, relative-error
scoring, and multi-realization experiment and grid orchestration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .adaptive import SelectionReport, run_blb_adaptive
from .errors import BlbkitError, ValidationError
from .estimators import EstimatorSpec, estimate, estimate_full
from .metrics import MetricSpec, average, summarize, summary_scale
from .model import DataMatrix, EstimateEnsemble, ProcedureConfig, QualitySummary
from .procedures import (
    _run_units,
    run_blb,
    run_bofn,
    run_bootstrap,
    run_subsampling,
)
from .resample import RngStream, draw_subset, resample_weighted

FEATURE_DISTS = ("normal", "student_t", "gamma")
LINKS = ("linear", "linear_scaled_by_sqrt_d", "nonlinear_noisy")


@dataclass(frozen=True)
class DataGeneratingSpec:
    """A known underlying distribution to sample datasets from.

    Features are i.i.d. per component (standard normal, Student-t with
    ``df`` degrees of freedom, or gamma). The linear index x'beta feeds
    the response: added noise for regression, a logistic link for
    classification. ``linear_scaled_by_sqrt_d`` divides the index by
    sqrt(d); ``nonlinear_noisy`` adds ``nonlinear_scale`` times the sum of
    squared features, a deliberately misspecified mapping (the quadratic
    form here is one concrete placeholder choice).
    """

    task: str
    d: int
    feature_dist: str = "normal"
    df: float = 3.0
    gamma_shape: float = 2.0
    gamma_scale: float = 1.0
    coefficients: tuple[float, ...] | None = None
    link: str = "linear"
    noise_sd: float = 1.0
    nonlinear_scale: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.task not in ("regression", "classification"):
            raise ValidationError(f"unknown task {self.task!r}")
        if self.d < 1:
            raise ValidationError("d must be >= 1")
        if self.feature_dist not in FEATURE_DISTS:
            raise ValidationError(f"unknown feature_dist {self.feature_dist!r}")
        if self.feature_dist == "student_t" and not self.df > 2:
            raise ValidationError("student_t needs df > 2 for finite variance")
        if self.feature_dist == "gamma" and (
            not self.gamma_shape > 0 or not self.gamma_scale > 0
        ):
            raise ValidationError("gamma needs positive shape and scale")
        if self.link not in LINKS:
            raise ValidationError(f"unknown link {self.link!r}")
        if self.task == "regression" and not self.noise_sd > 0:
            raise ValidationError("regression needs noise_sd > 0")
        if self.coefficients is not None:
            coeffs = tuple(float(c) for c in self.coefficients)
            if len(coeffs) != self.d:
                raise ValidationError("coefficients length must equal d")
            object.__setattr__(self, "coefficients", coeffs)

    @property
    def beta(self) -> np.ndarray:
        if self.coefficients is None:
            return np.ones(self.d)
        return np.asarray(self.coefficients, dtype=np.float64)


def generate(spec: DataGeneratingSpec, n: int, rng: RngStream) -> DataMatrix:
    """Draw n i.i.d. rows from the specified distribution."""
    if n < 1:
        raise ValidationError("n must be >= 1")
    gen = rng.generator
    if spec.feature_dist == "normal":
        features = gen.standard_normal((n, spec.d))
    elif spec.feature_dist == "student_t":
        features = gen.standard_t(spec.df, size=(n, spec.d))
    else:
        features = gen.gamma(spec.gamma_shape, spec.gamma_scale, size=(n, spec.d))
    index = features @ spec.beta
    if spec.link == "linear_scaled_by_sqrt_d":
        index = index / math.sqrt(spec.d)
    elif spec.link == "nonlinear_noisy":
        index = index + spec.nonlinear_scale * np.square(features).sum(axis=1)
    if spec.task == "regression":
        response = index + gen.normal(0.0, spec.noise_sd, size=n)
    else:
        probs = 0.5 * (1.0 + np.tanh(0.5 * index))
        response = (gen.random(n) < probs).astype(np.float64)
    return DataMatrix(features, response)


@dataclass(frozen=True)
class GroundTruth:
    """The target summary, estimated from many independent datasets."""

    summary: QualitySummary
    num_realizations: int
    n: int

    def __post_init__(self):
        if self.num_realizations < 2:
            raise ValidationError("ground truth needs num_realizations >= 2")


def compute_ground_truth(
    spec: DataGeneratingSpec,
    n: int,
    num_realizations: int,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    rng: RngStream,
    workers: int = 1,
) -> GroundTruth:
    """Estimate the target summary from ``num_realizations`` fresh datasets.

    Each realization contributes its full-data estimate (unit weights);
    the pooled ensemble of one estimate per realization is summarized.
    """
    if num_realizations < 2:
        raise ValidationError("num_realizations must be >= 2")

    def make_task(i):
        def task():
            data = generate(spec, n, rng.child("realization", i))
            return estimate_full(estimator, data)

        return task

    estimates = _run_units([make_task(i) for i in range(num_realizations)], workers)
    summary = summarize(metric, EstimateEnsemble(np.stack(estimates)))
    return GroundTruth(summary, num_realizations, n)


def relative_error(estimated: QualitySummary, truth: QualitySummary) -> float:
    """Mean across dimensions of |c - c_o| / c_o.

    Interval summaries are compared on their widths, scalar summaries on
    their values; every truth component must be nonzero.
    """
    if not estimated.same_shape(truth):
        raise ValidationError("summary and truth differ in kind or shape")
    values = summary_scale(estimated)
    target = summary_scale(truth)
    if np.any(target == 0.0):
        raise ValidationError("ground-truth components must be nonzero")
    return float(np.mean(np.abs(values - target) / np.abs(target)))


DRIVERS = {
    "blb": run_blb,
    "bootstrap": run_bootstrap,
    "bofn": run_bofn,
    "subsampling": run_subsampling,
    "blb_adaptive": run_blb_adaptive,
}


@dataclass(frozen=True)
class ProcedureSetup:
    """One labeled procedure cell in an experiment."""

    label: str
    method: str
    config: ProcedureConfig

    def __post_init__(self):
        if self.method not in DRIVERS:
            raise ValidationError(f"unknown method {self.method!r}")
        if self.method == "blb_adaptive" and self.config.adaptive is None:
            raise ValidationError("blb_adaptive requires adaptive parameters")


def _run_setup(setup: ProcedureSetup, data, estimator, metric, config, workers):
    result = DRIVERS[setup.method](data, estimator, metric, config, workers)
    if setup.method == "blb_adaptive":
        summary, trajectory, report = result
        return summary, trajectory, report
    summary, trajectory = result
    return summary, trajectory, None


@dataclass(frozen=True)
class CellResult:
    """Averaged error-vs-time trajectory for one procedure."""

    label: str
    method: str
    steps: tuple[tuple[float, float], ...]
    final_errors: tuple[float, ...]
    mean_final_error: float | None
    mean_total_seconds: float | None
    selections: tuple[SelectionReport, ...] | None
    error: str | None


@dataclass(frozen=True)
class ExperimentReport:
    n: int
    num_realizations: int
    cells: tuple[CellResult, ...]


def run_experiment(
    spec: DataGeneratingSpec,
    n: int,
    procedures: list[ProcedureSetup],
    estimator: EstimatorSpec,
    metric: MetricSpec,
    truth: GroundTruth,
    num_dataset_realizations: int,
    rng: RngStream,
    workers: int = 1,
) -> ExperimentReport:
    """Score every procedure against the ground truth on fresh datasets.

    Each of ``num_dataset_realizations`` datasets is assessed by every
    procedure; each trajectory step's partial summary becomes a relative
    error, and trajectories are averaged across realizations by step
    index (the step budgets are deterministic, so indices align). A
    failing cell is recorded and does not abort the others.
    """
    if truth.n != n:
        raise ValidationError(f"ground truth was computed for n={truth.n}, not {n}")
    if num_dataset_realizations < 1:
        raise ValidationError("num_dataset_realizations must be >= 1")
    per_cell_steps: dict[str, list[list[tuple[float, float]]]] = {
        setup.label: [] for setup in procedures
    }
    per_cell_selections: dict[str, list[SelectionReport]] = {
        setup.label: [] for setup in procedures
    }
    failures: dict[str, str] = {}
    for i in range(num_dataset_realizations):
        data = generate(spec, n, rng.child("dataset", i))
        for c_idx, setup in enumerate(procedures):
            if setup.label in failures:
                continue
            cell_seed = int(rng.child("proc", c_idx, i).generator.integers(0, 2**62))
            config = replace(setup.config, seed=cell_seed)
            try:
                _, trajectory, selection = _run_setup(
                    setup, data, estimator, metric, config, workers
                )
                scored = [
                    (step.elapsed_seconds, relative_error(step.summary, truth.summary))
                    for step in trajectory.steps
                ]
                per_cell_steps[setup.label].append(scored)
                if selection is not None:
                    per_cell_selections[setup.label].append(selection)
            except BlbkitError as exc:
                failures[setup.label] = f"{type(exc).__name__}: {exc}"
    cells = []
    for setup in procedures:
        runs = per_cell_steps[setup.label]
        if setup.label in failures or not runs:
            cells.append(
                CellResult(
                    setup.label,
                    setup.method,
                    (),
                    (),
                    None,
                    None,
                    None,
                    failures.get(setup.label, "no successful realizations"),
                )
            )
            continue
        lengths = {len(run) for run in runs}
        if len(lengths) != 1 and setup.method != "blb_adaptive":
            raise ValidationError(
                f"cell {setup.label}: step counts differ across realizations"
            )
        # Adaptive runs stop at data-dependent step counts; average over
        # the indices present in every realization.
        common = min(lengths)
        steps = tuple(
            (
                float(np.mean([run[t][0] for run in runs])),
                float(np.mean([run[t][1] for run in runs])),
            )
            for t in range(common)
        )
        final_errors = tuple(run[-1][1] for run in runs)
        selections = per_cell_selections[setup.label] or None
        cells.append(
            CellResult(
                setup.label,
                setup.method,
                steps,
                final_errors,
                float(np.mean(final_errors)),
                float(np.mean([run[-1][0] for run in runs])),
                tuple(selections) if selections else None,
                None,
            )
        )
    return ExperimentReport(n, num_dataset_realizations, tuple(cells))


@dataclass(frozen=True)
class GridReport:
    """Mean relative error per (r, s) hyperparameter pair."""

    r_values: tuple[int, ...]
    s_values: tuple[int, ...]
    errors: np.ndarray  # shape (len(s_values), len(r_values))
    n: int
    num_realizations: int

    def error_at(self, r: int, s: int) -> float:
        return float(
            self.errors[self.s_values.index(s), self.r_values.index(r)]
        )


def run_grid(
    spec: DataGeneratingSpec,
    n: int,
    config: ProcedureConfig,
    r_values: list[int],
    s_values: list[int],
    estimator: EstimatorSpec,
    metric: MetricSpec,
    truth: GroundTruth,
    num_realizations: int,
    rng: RngStream,
    workers: int = 1,
) -> GridReport:
    """Relative error of the bag of little bootstraps over an (r, s) grid.

    One full run at (max r, max s) per realization provides every smaller
    cell as a prefix: cell (r, s) averages the first s per-subsample
    summaries, each computed from that subsample's first r resamples.
    The resample streams match run_blb's, so cells agree with standalone
    runs at the same seed.
    """
    r_values = sorted(set(int(r) for r in r_values))
    s_values = sorted(set(int(s) for s in s_values))
    if min(r_values) < metric.min_ensemble_size:
        raise ValidationError(f"metric {metric.kind} needs r >= {metric.min_ensemble_size}")
    if truth.n != n:
        raise ValidationError(f"ground truth was computed for n={truth.n}, not {n}")
    r_max, s_max = r_values[-1], s_values[-1]
    b = config.resolve_b(n)
    errors = np.zeros((len(s_values), len(r_values)))
    for i in range(num_realizations):
        data = generate(spec, n, rng.child("dataset", i))
        master = RngStream(int(rng.child("proc", 0, i).generator.integers(0, 2**62)))
        subsets = [draw_subset(n, b, master.child("subsample", j)) for j in range(s_max)]

        def make_task(j, k):
            def task():
                sample = resample_weighted(
                    data, subsets[j], n, config.resample_flavor,
                    master.child("resample", j, k),
                )
                return estimate(sample=sample, spec=estimator)

            return task

        outcomes = _run_units(
            [make_task(j, k) for j in range(s_max) for k in range(r_max)], workers
        )
        summaries = {}
        for j in range(s_max):
            stack = np.stack(outcomes[j * r_max : (j + 1) * r_max])
            for r in r_values:
                summaries[j, r] = summarize(metric, EstimateEnsemble(stack[:r]))
        for si, s in enumerate(s_values):
            for ri, r in enumerate(r_values):
                cell = average([summaries[j, r] for j in range(s)])
                errors[si, ri] += relative_error(cell, truth.summary)
    errors /= num_realizations
    return GridReport(tuple(r_values), tuple(s_values), errors, n, num_realizations)
