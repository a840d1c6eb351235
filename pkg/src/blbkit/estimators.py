"""Weighted M-estimators that consume a WeightedSample directly.

Working on the (distinct rows, counts) representation is what keeps the
per-resample cost proportional to the number of distinct rows rather than
the nominal resample size. The numerical kernels live in ``_kernels``
(compiled when available, numpy otherwise); this module owns validation,
dispatch, and error reporting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import EstimationError, ValidationError
from .model import WeightedSample

ESTIMATOR_KINDS = ("weighted_mean", "least_squares", "logistic_newton")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to run and its solver parameters.

    ``ridge_lambda`` is an absolute L2 penalty on the summed (weighted)
    objective; the default 0 means rank deficiency and separability
    surface as errors instead of being silently regularized away.
    """

    kind: str
    max_iterations: int = 100
    gradient_tolerance: float = 1e-8
    ridge_lambda: float = 0.0

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValidationError(f"unknown estimator kind {self.kind!r}")
        if self.max_iterations < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not self.gradient_tolerance > 0:
            raise ValidationError("gradient_tolerance must be positive")
        if self.ridge_lambda < 0:
            raise ValidationError("ridge_lambda must be >= 0")

    @property
    def needs_response(self) -> bool:
        return self.kind != "weighted_mean"


def estimate(spec: EstimatorSpec, sample: WeightedSample) -> np.ndarray:
    """Compute the estimator on a weighted sample.

    The result depends only on the (row, weight) multiset: reordering rows
    or splitting a row's weight across duplicate rows does not change it
    (up to floating-point rounding).

    Returns
    -------
    np.ndarray
        The estimate vector (dimension p), always finite.

    Raises
    ------
    EstimationError
        On a singular normal-equation system (rank deficiency with
        ridge_lambda = 0), Newton non-convergence (separability or
        ill-conditioning), or a non-finite result.
    """
    weights = sample.weights.astype(np.float64)
    features = sample.features
    if spec.kind == "weighted_mean":
        result = _kernels.weighted_mean(features, weights)
    else:
        response = sample.response
        if response is None:
            raise ValidationError(f"{spec.kind} requires a response")
        if spec.kind == "least_squares":
            try:
                result = _kernels.weighted_least_squares(
                    features, response, weights, spec.ridge_lambda
                )
            except np.linalg.LinAlgError:
                raise EstimationError(
                    "singular normal equations: design is rank deficient "
                    "and ridge_lambda is 0"
                ) from None
        else:
            if not np.all((response == 0.0) | (response == 1.0)):
                raise ValidationError("logistic regression requires 0/1 responses")
            try:
                result, converged, iterations = _kernels.weighted_logistic_newton(
                    features,
                    response,
                    weights,
                    spec.ridge_lambda,
                    spec.gradient_tolerance,
                    spec.max_iterations,
                )
            except np.linalg.LinAlgError:
                raise EstimationError(
                    "singular Newton system: data may be degenerate "
                    "and ridge_lambda is 0"
                ) from None
            if not converged:
                raise EstimationError(
                    f"Newton did not converge within {spec.max_iterations} "
                    "iterations (separable or ill-conditioned sample)"
                )
    result = np.asarray(result, dtype=np.float64)
    if not np.isfinite(result).all():
        raise EstimationError("estimator produced non-finite values")
    return result


def estimate_full(spec: EstimatorSpec, data) -> np.ndarray:
    """Estimate on the full dataset with unit weights."""
    return estimate(spec, WeightedSample.uniform(data.features, data.response))
