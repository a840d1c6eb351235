"""Quality metrics: turn an estimate ensemble into a summary, average
summaries across subsamples, and rescale summaries computed at a smaller
sample size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import INTERVAL_SET, SCALAR_PER_DIM, EstimateEnsemble, QualitySummary

METRIC_KINDS = ("marginal_ci", "stderr")


@dataclass(frozen=True)
class MetricSpec:
    """Which quality summary to compute per ensemble."""

    kind: str
    coverage: float = 0.95

    def __post_init__(self):
        if self.kind not in METRIC_KINDS:
            raise ValidationError(f"unknown metric kind {self.kind!r}")
        if not 0.0 < self.coverage < 1.0:
            raise ValidationError("coverage must lie in (0, 1)")

    @property
    def min_ensemble_size(self) -> int:
        return 2 if self.kind == "stderr" else 1


def summarize(spec: MetricSpec, ensemble: EstimateEnsemble) -> QualitySummary:
    """Summarize an ensemble of estimates.

    ``marginal_ci`` takes, per dimension, the empirical [alpha/2, 1-alpha/2]
    quantiles of the estimates, interpolating linearly between order
    statistics (position 1 + (r-1)*prob). ``stderr`` takes the per-dimension
    sample standard deviation (divisor r-1) and needs r >= 2.
    """
    if ensemble.r < spec.min_ensemble_size:
        raise ValidationError(
            f"{spec.kind} needs at least {spec.min_ensemble_size} estimates, "
            f"got {ensemble.r}"
        )
    if spec.kind == "marginal_ci":
        alpha = 1.0 - spec.coverage
        bounds = np.quantile(
            ensemble.estimates, [alpha / 2.0, 1.0 - alpha / 2.0], axis=0
        )
        return QualitySummary.intervals(bounds[0], bounds[1], spec.coverage)
    return QualitySummary.scalars(np.std(ensemble.estimates, axis=0, ddof=1))


def average(summaries: list[QualitySummary]) -> QualitySummary:
    """Element-wise mean of summaries of identical kind and shape."""
    if not summaries:
        raise ValidationError("cannot average an empty list of summaries")
    first = summaries[0]
    for other in summaries[1:]:
        if not first.same_shape(other):
            raise ValidationError("summaries differ in kind, shape, or coverage")
    if first.kind == INTERVAL_SET:
        lower = np.mean([s.lower for s in summaries], axis=0)
        upper = np.mean([s.upper for s in summaries], axis=0)
        return QualitySummary.intervals(lower, upper, first.coverage)
    return QualitySummary.scalars(np.mean([s.values for s in summaries], axis=0))


def correct_for_size(
    summary: QualitySummary, b: int, n: int, rate_exponent: float
) -> QualitySummary:
    """Rescale a summary computed from size-b estimates up to size n.

    Interval half-widths (about the midpoint) and stderr scalars are
    multiplied by (b/n)**rate_exponent; interval midpoints are untouched.
    The correction concerns dispersion only, which is why it scales about
    the midpoint rather than the origin.
    """
    if not 1 <= b <= n:
        raise ValidationError(f"need 1 <= b <= n, got b={b}, n={n}")
    if not rate_exponent > 0:
        raise ValidationError("rate_exponent must be positive")
    factor = (b / n) ** rate_exponent
    if summary.kind == INTERVAL_SET:
        mid = 0.5 * (summary.lower + summary.upper)
        half = 0.5 * (summary.upper - summary.lower) * factor
        return QualitySummary.intervals(mid - half, mid + half, summary.coverage)
    return QualitySummary.scalars(summary.values * factor)


def ci_widths(summary: QualitySummary) -> np.ndarray:
    """Per-dimension interval widths (upper - lower)."""
    if summary.kind != INTERVAL_SET:
        raise ValidationError("ci_widths requires an interval summary")
    return summary.upper - summary.lower


def summary_scale(summary: QualitySummary) -> np.ndarray:
    """The per-dimension comparison scale: CI widths or stderr values."""
    if summary.kind == INTERVAL_SET:
        return ci_widths(summary)
    return summary.values.copy()
