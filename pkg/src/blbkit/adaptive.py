"""Convergence assessment and the adaptive driver that grows the number
of resamples per subsample (r) and the number of subsamples (s) until the
output stabilizes.

A series of summary vectors is deemed converged once, for every lag in a
trailing window, the mean across dimensions of the relative deviation
from the latest value is at or below a target epsilon. The inner loop
applies this to the per-subsample summary after each resample; the outer
loop applies it to the running average after each subsample.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import BlbkitError, ValidationError
from .estimators import EstimatorSpec, estimate
from .metrics import MetricSpec, average, summarize
from .model import DataMatrix, EstimateEnsemble, ProcedureConfig, QualitySummary
from .procedures import Trajectory, TrajectoryStep
from .resample import RngStream, draw_partition, draw_subset, resample_weighted

# Dimensions whose latest value is almost exactly zero would otherwise
# divide by zero; they contribute |delta| / DENOM_FLOOR instead.
DENOM_FLOOR = 1e-12


def convergence_vector(summary: QualitySummary) -> np.ndarray:
    """The per-dimension values whose stability drives the stopping rule.

    Interval summaries contribute their widths, scalar summaries their
    values. Raw interval bounds can sit arbitrarily close to zero (any
    mean-zero estimand), where relative deviations are meaningless; the
    width is the quantity the assessment reports, and it lives on a
    stable scale.
    """
    if summary.kind == "interval_set":
        return summary.upper - summary.lower
    return summary.values.copy()


class SummarySeries:
    """An ordered list of flattened summary vectors of equal dimension."""

    def __init__(self, values=()):
        self._values: list[np.ndarray] = []
        for value in values:
            self.append(value)

    def append(self, value) -> None:
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim != 1:
            raise ValidationError("series entries must be one-dimensional")
        if self._values and arr.shape != self._values[0].shape:
            raise ValidationError(
                f"series entry dimension {arr.shape[0]} != "
                f"{self._values[0].shape[0]}"
            )
        self._values.append(arr)

    @property
    def values(self) -> list[np.ndarray]:
        return list(self._values)

    def __len__(self) -> int:
        return len(self._values)


def has_converged(series, window: int, epsilon: float) -> bool:
    """True iff the series has ceased to fluctuate beyond ``epsilon``.

    Requires the series to be longer than ``window``; then, for every lag
    j in 1..window, the mean over dimensions of
    |z[t-j] - z[t]| / max(|z[t]|, floor) must be <= epsilon.
    """
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    if window < 1:
        raise ValidationError("window must be >= 1")
    values = series.values if isinstance(series, SummarySeries) else SummarySeries(series).values
    t = len(values)
    if t <= window:
        return False
    latest = values[-1]
    denom = np.maximum(np.abs(latest), DENOM_FLOOR)
    for lag in range(1, window + 1):
        deviation = float(np.mean(np.abs(values[t - 1 - lag] - latest) / denom))
        if deviation > epsilon:
            return False
    return True


@dataclass(frozen=True)
class SelectionReport:
    """What the adaptive driver chose: r per processed subsample, final s."""

    r_values: tuple[int, ...]
    s_selected: int
    r_stop_reasons: tuple[str, ...]
    s_stop_reason: str

    @property
    def total_resamples(self) -> int:
        return sum(self.r_values)

    def to_dict(self) -> dict:
        return {
            "r_values": list(self.r_values),
            "s_selected": self.s_selected,
            "r_stop_reasons": list(self.r_stop_reasons),
            "s_stop_reason": self.s_stop_reason,
            "total_resamples": self.total_resamples,
        }


class _OrderedPrefetch:
    """Evaluate index-labeled tasks with bounded lookahead, consumed in order.

    Stopping decisions depend only on consumed results, so results are
    identical to a strictly sequential loop for every worker count; extra
    prefetched units are simply discarded when the loop stops early.
    """

    def __init__(self, factory, limit: int, pool, depth: int):
        self._factory = factory
        self._limit = limit
        self._pool = pool
        self._depth = max(1, depth)
        self._pending = {}
        self._next = 0

    def get(self, k):
        if self._pool is None:
            return self._factory(k)()
        while self._next < min(k + self._depth, self._limit):
            self._pending[self._next] = self._pool.submit(self._factory(self._next))
            self._next += 1
        return self._pending.pop(k).result()

    def drain(self):
        for fut in self._pending.values():
            fut.cancel()
        self._pending.clear()


def run_blb_adaptive(
    data: DataMatrix,
    estimator: EstimatorSpec,
    metric: MetricSpec,
    config: ProcedureConfig,
    workers: int = 1,
) -> tuple[QualitySummary, Trajectory, SelectionReport]:
    """Bag of little bootstraps with adaptive selection of r and s.

    Per subsample, resamples are processed (and the subsample summary
    recomputed) until the summary's convergence vector (interval widths,
    or stderr values) stabilizes under (window_r, epsilon_r) or r_max is
    reached; subsamples are processed until the running average's
    convergence vector stabilizes under (window_s, epsilon_s) or s_max is
    reached. The per-subsample series starts at the first resample count
    the metric can summarize (1 for intervals, 2 for stderr).
    """
    if config.adaptive is None:
        raise ValidationError("config.adaptive is required for the adaptive driver")
    if estimator.needs_response and data.response is None:
        raise ValidationError(f"{estimator.kind} requires data with a response")
    ap = config.adaptive
    n = data.n
    b = config.resolve_b(n)
    master = RngStream(config.seed)

    if config.subsample_mode == "disjoint_partition":
        parts = draw_partition(n, b, master.child("partition"))
        s_cap = min(ap.s_max, len(parts))

        def subset_for(j):
            return parts[j]

    else:
        s_cap = ap.s_max

        def subset_for(j):
            return draw_subset(n, b, master.child("subsample", j))

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    started = time.perf_counter()
    per_subsample: list[QualitySummary] = []
    r_values: list[int] = []
    r_reasons: list[str] = []
    outer_series = SummarySeries()
    steps: list[TrajectoryStep] = []
    s_reason = "s_max"
    try:
        for j in range(s_cap):
            subset = subset_for(j)

            def factory(k, subset=subset, j=j):
                def task():
                    rng = master.child("resample", j, k)
                    try:
                        sample = resample_weighted(
                            data, subset, n, config.resample_flavor, rng
                        )
                        return estimate(estimator, sample)
                    except BlbkitError as exc:
                        raise type(exc)(
                            f"subsample {j}, resample {k}: {exc}"
                        ) from exc

                return task

            prefetch = _OrderedPrefetch(factory, ap.r_max, pool, depth=workers)
            estimates: list[np.ndarray] = []
            inner_series = SummarySeries()
            summary_j = None
            r_reason = "r_max"
            for k in range(ap.r_max):
                estimates.append(prefetch.get(k))
                if len(estimates) >= metric.min_ensemble_size:
                    summary_j = summarize(metric, EstimateEnsemble(np.stack(estimates)))
                    inner_series.append(convergence_vector(summary_j))
                    if has_converged(inner_series, ap.window_r, ap.epsilon_r):
                        r_reason = "converged"
                        break
            prefetch.drain()
            per_subsample.append(summary_j)
            r_values.append(len(estimates))
            r_reasons.append(r_reason)

            running = average(per_subsample)
            outer_series.append(convergence_vector(running))
            elapsed = time.perf_counter() - started
            steps.append(TrajectoryStep(elapsed, running, f"subsample {j}"))
            if has_converged(outer_series, ap.window_s, ap.epsilon_s):
                s_reason = "converged"
                break
    finally:
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)

    report = SelectionReport(
        tuple(r_values), len(per_subsample), tuple(r_reasons), s_reason
    )
    return average(per_subsample), Trajectory(tuple(steps)), report
