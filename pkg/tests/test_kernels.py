"""Backend parity: the compiled kernels must agree with the numpy
reference implementations."""

import numpy as np
import pytest

from blbkit._kernels import BACKEND, py_backend

try:
    from blbkit._kernels import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(
    _speedups is None, reason="compiled kernels not built"
)


def test_backend_selected():
    assert BACKEND in ("c", "python")


def _instances(seed, with_response):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        m = int(rng.integers(5, 300))
        d = int(rng.integers(1, 8))
        features = rng.standard_normal((m, d))
        weights = rng.integers(0, 9, size=m).astype(float)
        weights[0] = max(weights[0], 1.0)
        if with_response == "binary":
            beta = rng.standard_normal(d) * 0.5
            response = (rng.random(m) < 1 / (1 + np.exp(-features @ beta))).astype(float)
        elif with_response == "real":
            response = features @ rng.standard_normal(d) + rng.standard_normal(m)
        else:
            response = None
        yield features, response, weights


@needs_compiled
def test_weighted_mean_parity():
    for features, _, weights in _instances(1, None):
        a = py_backend.weighted_mean(features, weights)
        b = _speedups.weighted_mean(features, weights)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_compiled
def test_least_squares_parity():
    for features, response, weights in _instances(2, "real"):
        a = py_backend.weighted_least_squares(features, response, weights, 0.1)
        b = _speedups.weighted_least_squares(features, response, weights, 0.1)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-11)


@needs_compiled
def test_logistic_parity():
    for features, response, weights in _instances(3, "binary"):
        a, conv_a, _ = py_backend.weighted_logistic_newton(
            features, response, weights, 0.01, 1e-8, 100
        )
        b, conv_b, _ = _speedups.weighted_logistic_newton(
            features, response, weights, 0.01, 1e-8, 100
        )
        assert conv_a and conv_b
        np.testing.assert_allclose(a, b, rtol=1e-7, atol=1e-9)


@needs_compiled
def test_singular_raises_in_both_backends():
    features = np.array([[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    response = np.array([1.0, 2.0, 3.0])
    weights = np.ones(3)
    for impl in (py_backend, _speedups):
        with pytest.raises(np.linalg.LinAlgError):
            impl.weighted_least_squares(features, response, weights, 0.0)
