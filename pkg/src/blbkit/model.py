"""Core value types: datasets, index subsets, weighted resamples, estimate
ensembles, quality summaries, and run configuration.

All types validate their invariants at construction and are immutable
afterwards, so instances can be shared freely between worker threads.
Estimate vectors themselves are plain float64 ndarrays; finiteness is
enforced where they enter the system (estimators and ``EstimateEnsemble``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

INTERVAL_SET = "interval_set"
SCALAR_PER_DIM = "scalar_per_dim"

TASKS = ("regression", "classification")
RESAMPLE_FLAVORS = ("multinomial", "poisson")
SUBSAMPLE_MODES = ("uniform_without_replacement", "disjoint_partition")


def _freeze(obj, name, value):
    object.__setattr__(obj, name, value)


def _as_matrix(values, name: str) -> np.ndarray:
    try:
        arr = np.ascontiguousarray(values, dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {arr.shape}")
    return arr


def _as_vector(values, name: str) -> np.ndarray:
    try:
        arr = np.ascontiguousarray(values, dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{name}: {exc}") from None
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class DataMatrix:
    """The observed sample: an (n, p) feature matrix plus an optional response.

    Parameters
    ----------
    features : array_like of shape (n, p)
        One row per observation. All entries must be finite.
    response : array_like of shape (n,), optional
        Regression targets or {0, 1} class labels. Binary-ness is checked
        by :func:`validate` once the task is known.
    """

    features: np.ndarray
    response: np.ndarray | None = None

    def __post_init__(self):
        features = _as_matrix(self.features, "features")
        n, p = features.shape
        if n < 1 or p < 1:
            raise ValidationError(f"need n >= 1 and p >= 1, got shape {features.shape}")
        if not np.isfinite(features).all():
            raise ValidationError("features contain non-finite entries")
        _freeze(self, "features", features)
        if self.response is not None:
            response = _as_vector(self.response, "response")
            if response.shape[0] != n:
                raise ValidationError(
                    f"response length {response.shape[0]} != row count {n}"
                )
            if not np.isfinite(response).all():
                raise ValidationError("response contains non-finite entries")
            _freeze(self, "response", response)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
        """Materialize the rows at ``indices`` (copies; the result is compact)."""
        feats = self.features[indices]
        resp = None if self.response is None else self.response[indices]
        return feats, resp


def validate(data: DataMatrix, task: str) -> None:
    """Check that ``data`` is well formed for ``task``; raise otherwise.

    Raises
    ------
    ValidationError
        On unknown task, missing response, or (for classification)
        responses outside {0, 1}.
    """
    if task not in TASKS:
        raise ValidationError(f"unknown task {task!r}; expected one of {TASKS}")
    if data.response is None:
        raise ValidationError(f"{task} data requires a response column")
    if task == "classification":
        resp = data.response
        if not np.all((resp == 0.0) | (resp == 1.0)):
            bad = resp[(resp != 0.0) & (resp != 1.0)][0]
            raise ValidationError(f"classification response must be 0 or 1, got {bad}")


@dataclass(frozen=True)
class IndexSubset:
    """A set of distinct row indices into a :class:`DataMatrix`."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.ascontiguousarray(self.indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValidationError("indices must be a nonempty 1-d integer array")
        if idx.min() < 0:
            raise ValidationError("indices must be nonnegative")
        if np.unique(idx).size != idx.size:
            raise ValidationError("indices must be distinct")
        _freeze(self, "indices", idx)

    @property
    def b(self) -> int:
        return self.indices.shape[0]


@dataclass(frozen=True)
class WeightedSample:
    """At most b distinct rows with nonnegative integer multiplicities.

    ``nominal_size`` is the total mass the sample stands for and always
    equals ``weights.sum()``: the nominal resample size n for multinomial
    draws, the realized sum for Poisson draws, and the row count for
    uniform (all-ones) samples.
    """

    features: np.ndarray
    weights: np.ndarray
    nominal_size: int
    response: np.ndarray | None = None

    def __post_init__(self):
        features = _as_matrix(self.features, "features")
        weights = np.ascontiguousarray(self.weights, dtype=np.int64)
        if weights.ndim != 1 or weights.shape[0] != features.shape[0]:
            raise ValidationError("weights must be one per row")
        if weights.min(initial=0) < 0:
            raise ValidationError("weights must be nonnegative")
        total = int(weights.sum())
        if total < 1:
            raise ValidationError("total weight must be >= 1")
        if int(self.nominal_size) != total:
            raise ValidationError(
                f"nominal_size {self.nominal_size} != sum of weights {total}"
            )
        _freeze(self, "features", features)
        _freeze(self, "weights", weights)
        _freeze(self, "nominal_size", int(self.nominal_size))
        if self.response is not None:
            response = _as_vector(self.response, "response")
            if response.shape[0] != features.shape[0]:
                raise ValidationError("response length must match row count")
            _freeze(self, "response", response)

    @classmethod
    def uniform(cls, features, response=None) -> "WeightedSample":
        """All weights 1; nominal size equals the row count."""
        features = _as_matrix(features, "features")
        m = features.shape[0]
        return cls(features, np.ones(m, dtype=np.int64), m, response)

    @property
    def num_rows(self) -> int:
        return self.features.shape[0]

    @property
    def distinct_count(self) -> int:
        """Rows with nonzero weight actually present in the resample."""
        return int(np.count_nonzero(self.weights))


@dataclass(frozen=True)
class EstimateEnsemble:
    """r estimate vectors of equal dimension, stacked as an (r, d) array."""

    estimates: np.ndarray

    def __post_init__(self):
        est = _as_matrix(self.estimates, "estimates")
        if est.shape[0] < 1:
            raise ValidationError("ensemble needs at least one estimate")
        if not np.isfinite(est).all():
            raise ValidationError("estimates contain non-finite entries")
        _freeze(self, "estimates", est)

    @property
    def r(self) -> int:
        return self.estimates.shape[0]

    @property
    def dim(self) -> int:
        return self.estimates.shape[1]

    def prefix(self, r: int) -> "EstimateEnsemble":
        """The ensemble of the first ``r`` estimates."""
        if not 1 <= r <= self.r:
            raise ValidationError(f"prefix length {r} outside [1, {self.r}]")
        return EstimateEnsemble(self.estimates[:r])


@dataclass(frozen=True)
class QualitySummary:
    """Output of a quality metric: per-dimension intervals or scalars.

    ``kind`` is ``"interval_set"`` (lower/upper bounds plus a nominal
    coverage level) or ``"scalar_per_dim"`` (one real per dimension).
    Summaries of identical kind and shape form a vector space under
    element-wise averaging; see :func:`blbkit.metrics.average`.
    """

    kind: str
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    coverage: float | None = None
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == INTERVAL_SET:
            if self.lower is None or self.upper is None or self.coverage is None:
                raise ValidationError("interval summary needs lower, upper, coverage")
            lower = _as_vector(self.lower, "lower")
            upper = _as_vector(self.upper, "upper")
            if lower.shape != upper.shape:
                raise ValidationError("lower/upper shape mismatch")
            if not (np.isfinite(lower).all() and np.isfinite(upper).all()):
                raise ValidationError("interval bounds must be finite")
            if np.any(lower > upper):
                raise ValidationError("lower bound exceeds upper bound")
            if not 0.0 < float(self.coverage) < 1.0:
                raise ValidationError("coverage must lie in (0, 1)")
            _freeze(self, "lower", lower)
            _freeze(self, "upper", upper)
            _freeze(self, "coverage", float(self.coverage))
            if self.values is not None:
                raise ValidationError("interval summary must not carry scalar values")
        elif self.kind == SCALAR_PER_DIM:
            if self.values is None:
                raise ValidationError("scalar summary needs values")
            values = _as_vector(self.values, "values")
            if not np.isfinite(values).all():
                raise ValidationError("scalar values must be finite")
            _freeze(self, "values", values)
            if self.lower is not None or self.upper is not None or self.coverage is not None:
                raise ValidationError("scalar summary must not carry interval fields")
        else:
            raise ValidationError(f"unknown summary kind {self.kind!r}")

    @classmethod
    def intervals(cls, lower, upper, coverage: float) -> "QualitySummary":
        return cls(INTERVAL_SET, lower=lower, upper=upper, coverage=coverage)

    @classmethod
    def scalars(cls, values) -> "QualitySummary":
        return cls(SCALAR_PER_DIM, values=values)

    @property
    def dim(self) -> int:
        if self.kind == INTERVAL_SET:
            return self.lower.shape[0]
        return self.values.shape[0]

    def flatten(self) -> np.ndarray:
        """Flat vector form: [lower..., upper...] for intervals, values otherwise."""
        if self.kind == INTERVAL_SET:
            return np.concatenate([self.lower, self.upper])
        return self.values.copy()

    def same_shape(self, other: "QualitySummary") -> bool:
        if self.kind != other.kind or self.dim != other.dim:
            return False
        if self.kind == INTERVAL_SET and self.coverage != other.coverage:
            return False
        return True


@dataclass(frozen=True)
class AdaptiveParams:
    """Stopping parameters for adaptive growth of r (per subsample) and s."""

    epsilon_r: float = 0.05
    epsilon_s: float = 0.05
    window_r: int = 20
    window_s: int = 3
    r_max: int = 500
    s_max: int = 50

    def __post_init__(self):
        if not self.epsilon_r > 0 or not self.epsilon_s > 0:
            raise ValidationError("target relative errors must be positive")
        if self.window_r < 1 or self.window_s < 1:
            raise ValidationError("window sizes must be >= 1")
        if self.r_max <= self.window_r:
            raise ValidationError("r_max must exceed window_r")
        if self.s_max <= self.window_s:
            raise ValidationError("s_max must exceed window_s")


@dataclass(frozen=True)
class ProcedureConfig:
    """Configuration shared by the quality-assessment drivers.

    At most one of ``gamma`` (subset size b = floor(n**gamma), clamped to
    >= 1) or an explicit ``b`` may be set; with neither, gamma defaults
    to 0.7. ``rate_exponent`` feeds the analytical size correction of the
    b-out-of-n bootstrap and subsampling; 0.5 is the sqrt(n)-consistent
    default.
    """

    gamma: float | None = None
    b: int | None = None
    s: int = 5
    r: int = 100
    seed: int = 0
    resample_flavor: str = "multinomial"
    subsample_mode: str = "uniform_without_replacement"
    adaptive: AdaptiveParams | None = None
    rate_exponent: float = 0.5

    def __post_init__(self):
        if self.gamma is not None and self.b is not None:
            raise ValidationError("set either gamma or b, not both")
        if self.gamma is None and self.b is None:
            object.__setattr__(self, "gamma", 0.7)
        if self.gamma is not None and not 0.0 < self.gamma <= 1.0:
            raise ValidationError(f"gamma must lie in (0, 1], got {self.gamma}")
        if self.b is not None and self.b < 1:
            raise ValidationError("b must be >= 1")
        if self.s < 1 or self.r < 1:
            raise ValidationError("s and r must be >= 1")
        if self.resample_flavor not in RESAMPLE_FLAVORS:
            raise ValidationError(f"unknown resample flavor {self.resample_flavor!r}")
        if self.subsample_mode not in SUBSAMPLE_MODES:
            raise ValidationError(f"unknown subsample mode {self.subsample_mode!r}")
        if not self.rate_exponent > 0:
            raise ValidationError("rate_exponent must be positive")

    def resolve_b(self, n: int) -> int:
        """Subset size for a dataset of n rows; validates 1 <= b <= n."""
        if self.b is not None:
            b = self.b
        else:
            b = max(1, math.floor(n**self.gamma))
        if b > n:
            raise ValidationError(f"subset size b={b} exceeds n={n}")
        return b
