"""Quality-assessment drivers: bag of little bootstraps, classical
bootstrap, b-out-of-n bootstrap, and subsampling.

Each driver returns its final summary plus a trajectory of partial
outputs with cumulative wall-clock times, one step per completed work
unit (per subsample for the bag of little bootstraps, per resample for
the others). Work units run on a caller-sized thread pool; every unit
draws from its own labeled stream and partial results are reduced in
index order, so results are bit-identical for any worker count.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BlbkitError, EstimationError, ValidationError
from .estimators import EstimatorSpec, estimate
from .metrics import MetricSpec, average, correct_for_size, summarize
from .model import (
    DataMatrix,
    EstimateEnsemble,
    ProcedureConfig,
    QualitySummary,
    WeightedSample,
)
from .resample import (
    RngStream,
    draw_partition,
    draw_subset,
    resample_classical,
    resample_weighted,
)


@dataclass(frozen=True)
class TrajectoryStep:
    elapsed_seconds: float
    summary: QualitySummary
    work_unit: str


@dataclass(frozen=True)
class Trajectory:
    """Ordered partial outputs; elapsed times are nondecreasing."""

    steps: tuple[TrajectoryStep, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        last = -np.inf
        for step in self.steps:
            if step.elapsed_seconds < last:
                raise ValidationError("trajectory elapsed times must be nondecreasing")
            last = step.elapsed_seconds
        kinds = {step.summary.kind for step in self.steps}
        if len(kinds) > 1:
            raise ValidationError("trajectory mixes summary kinds")

    def __len__(self):
        return len(self.steps)


def _run_units(tasks, workers: int):
    """Run callables and return results in index order.

    Failures are re-raised deterministically: the lowest-index error wins
    no matter how the pool schedules the units.
    """
    results = [None] * len(tasks)
    errors = [None] * len(tasks)
    if workers <= 1 or len(tasks) <= 1:
        return [task() for task in tasks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task) for task in tasks]
        for i, fut in enumerate(futures):
            try:
                results[i] = fut.result()
            except BlbkitError as exc:
                errors[i] = exc
    for err in errors:
        if err is not None:
            raise err
    return results


def _check_driver_inputs(data, estimator, metric, config):
    if estimator.needs_response and data.response is None:
        raise ValidationError(f"{estimator.kind} requires data with a response")
    if config.r < metric.min_ensemble_size:
        raise ValidationError(
            f"metric {metric.kind} needs r >= {metric.min_ensemble_size}"
        )


def _blb_subsets(data, b, config, master):
    if config.subsample_mode == "disjoint_partition":
        parts = draw_partition(data.n, b, master.child("partition"))
        if config.s > len(parts):
            raise ValidationError(
                f"disjoint partition of n={data.n} into blocks of b={b} "
                f"yields only {len(parts)} subsamples, need s={config.s}"
            )
        return parts[: config.s]
    return [
        draw_subset(data.n, b, master.child("subsample", j)) for j in range(config.s)
    ]


def run_blb(
    data: DataMatrix,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    config: ProcedureConfig,
    workers: int = 1,
) -> tuple[QualitySummary, Trajectory]:
    """Bag of little bootstraps.

    Draws s subsamples of size b, then per subsample computes r weighted
    resamples of nominal size n (at most b distinct rows each), estimates
    each, and summarizes the per-subsample ensemble. The final output is
    the element-wise average of the s per-subsample summaries; the
    trajectory records the running average after each completed subsample.
    """
    _check_driver_inputs(data, estimator, metric, config)
    n = data.n
    b = config.resolve_b(n)
    master = RngStream(config.seed)
    subsets = _blb_subsets(data, b, config, master)
    started = time.perf_counter()

    def make_task(j, k):
        def task():
            rng = master.child("resample", j, k)
            try:
                sample = resample_weighted(
                    data, subsets[j], n, config.resample_flavor, rng
                )
                assert sample.distinct_count <= b
                result = estimate(estimator, sample)
            except BlbkitError as exc:
                raise type(exc)(
                    f"subsample {j}, resample {k}: {exc}"
                ) from exc
            return result, time.perf_counter()

        return task

    tasks = [make_task(j, k) for j in range(config.s) for k in range(config.r)]
    outcomes = _run_units(tasks, workers)

    per_subsample = []
    done_at = []
    for j in range(config.s):
        chunk = outcomes[j * config.r : (j + 1) * config.r]
        ensemble = EstimateEnsemble(np.stack([est for est, _ in chunk]))
        per_subsample.append(summarize(metric, ensemble))
        done_at.append(max(t for _, t in chunk))

    steps = []
    running_clock = 0.0
    for j in range(config.s):
        running_clock = max(running_clock, done_at[j] - started)
        steps.append(
            TrajectoryStep(
                running_clock, average(per_subsample[: j + 1]), f"subsample {j}"
            )
        )
    return average(per_subsample), Trajectory(tuple(steps))


def _bofn_sample(data: DataMatrix, b: int, rng: RngStream) -> WeightedSample:
    """b i.i.d. with-replacement draws over all n rows, stored compactly.

    Tallying b uniform indices is the same distribution as a
    Multinomial(b, uniform over n) count vector, but costs O(b) and keeps
    only the <= b distinct rows actually drawn.
    """
    idx = rng.generator.integers(0, data.n, size=b)
    distinct, counts = np.unique(idx, return_counts=True)
    feats, resp = data.take(distinct)
    return WeightedSample(feats, counts.astype(np.int64), b, resp)


def _run_per_resample(data, estimator, metric, config, workers, sampler, finisher):
    """Shared driver body for the bootstrap-family procedures."""
    _check_driver_inputs(data, estimator, metric, config)
    started = time.perf_counter()

    def make_task(k):
        def task():
            try:
                sample = sampler(k, master.child("resample", 0, k))
                result = estimate(estimator, sample)
            except BlbkitError as exc:
                raise type(exc)(f"resample {k}: {exc}") from exc
            return result, time.perf_counter()

        return task

    master = RngStream(config.seed)
    outcomes = _run_units([make_task(k) for k in range(config.r)], workers)
    estimates = np.stack([est for est, _ in outcomes])
    done_at = [t for _, t in outcomes]

    steps = []
    running_clock = 0.0
    final = None
    for k in range(config.r):
        running_clock = max(running_clock, done_at[k] - started)
        if k + 1 < metric.min_ensemble_size:
            continue
        partial = finisher(summarize(metric, EstimateEnsemble(estimates[: k + 1])))
        steps.append(TrajectoryStep(running_clock, partial, f"resample {k}"))
        final = partial
    return final, Trajectory(tuple(steps))


def run_bootstrap(
    data: DataMatrix,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    config: ProcedureConfig,
    workers: int = 1,
) -> tuple[QualitySummary, Trajectory]:
    """Classical bootstrap: r resamples of size n with replacement."""
    return _run_per_resample(
        data,
        estimator,
        metric,
        config,
        workers,
        lambda k, rng: resample_classical(data, rng),
        lambda summary: summary,
    )


def run_bofn(
    data: DataMatrix,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    config: ProcedureConfig,
    workers: int = 1,
) -> tuple[QualitySummary, Trajectory]:
    """b-out-of-n bootstrap: r size-b resamples drawn with replacement from
    the full dataset, with the summary rescaled by (b/n)**rate_exponent.

    Resamples range over all n rows; only the bag of little bootstraps
    restricts resampling to a fixed subsample.
    """
    n = data.n
    b = config.resolve_b(n)
    return _run_per_resample(
        data,
        estimator,
        metric,
        config,
        workers,
        lambda k, rng: _bofn_sample(data, b, rng),
        lambda summary: correct_for_size(summary, b, n, config.rate_exponent),
    )


def run_subsampling(
    data: DataMatrix,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    config: ProcedureConfig,
    workers: int = 1,
) -> tuple[QualitySummary, Trajectory]:
    """Subsampling: as run_bofn but each draw is a without-replacement
    subset of size b with unit weights."""
    n = data.n
    b = config.resolve_b(n)

    def sampler(k, rng):
        feats, resp = data.take(draw_subset(n, b, rng).indices)
        return WeightedSample.uniform(feats, resp)

    return _run_per_resample(
        data,
        estimator,
        metric,
        config,
        workers,
        sampler,
        lambda summary: correct_for_size(summary, b, n, config.rate_exponent),
    )
