"""Pure-numpy weighted estimator kernels.

Reference implementations of the hot kernels; the compiled module in
``_speedups.pyx`` mirrors these formulas exactly (same sigmoid, same
objective, same damping rule) so the two backends agree to rounding.
"""

from __future__ import annotations

import numpy as np

_RCOND = 1e-12


def _solve_spd(a: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a symmetric positive-definite d x d system; raise if singular."""
    evals = np.linalg.eigvalsh(a)
    if evals[-1] <= 0.0 or evals[0] <= _RCOND * evals[-1]:
        raise np.linalg.LinAlgError("matrix is singular or not positive definite")
    return np.linalg.solve(a, rhs)


def weighted_mean(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Per-coordinate weighted average of the rows."""
    return features.T @ weights / weights.sum()


def weighted_least_squares(
    features: np.ndarray,
    response: np.ndarray,
    weights: np.ndarray,
    ridge: float,
) -> np.ndarray:
    """Ridge-penalized weighted least squares via the normal equations."""
    xw = features * weights[:, None]
    gram = xw.T @ features
    if ridge > 0.0:
        gram = gram + ridge * np.eye(features.shape[1])
    rhs = features.T @ (weights * response)
    return _solve_spd(gram, rhs)


def weighted_logistic_newton(
    features: np.ndarray,
    response: np.ndarray,
    weights: np.ndarray,
    ridge: float,
    tolerance: float,
    max_iterations: int,
) -> tuple[np.ndarray, bool, int]:
    """Damped Newton for ridge-penalized weighted logistic regression.

    Starts from beta = 0 and halves the step (up to 30 times) whenever the
    penalized negative log-likelihood fails to decrease. Returns
    ``(beta, converged, iterations)`` where convergence means the gradient
    max-norm dropped to ``tolerance`` or below.
    """
    m, d = features.shape
    beta = np.zeros(d)
    z = np.zeros(m)
    nll = _penalized_nll(z, response, weights, ridge, beta)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        p = 0.5 * (1.0 + np.tanh(0.5 * z))
        grad = features.T @ (weights * (response - p)) - ridge * beta
        if np.max(np.abs(grad)) <= tolerance:
            return beta, True, iterations - 1
        curvature = weights * p * (1.0 - p)
        hess = (features * curvature[:, None]).T @ features
        if ridge > 0.0:
            hess = hess + ridge * np.eye(d)
        delta = _solve_spd(hess, grad)
        # Accept within a machine-precision slack: near the optimum the
        # true decrease per step is far below the float resolution of the
        # objective, and an exact <= test would stall the gradient above
        # the tolerance.
        slack = 1e-12 * (1.0 + abs(nll))
        step = 1.0
        improved = False
        for _ in range(31):
            cand = beta + step * delta
            zc = features @ cand
            nll_c = _penalized_nll(zc, response, weights, ridge, cand)
            if nll_c <= nll + slack:
                beta, z, nll = cand, zc, nll_c
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    p = 0.5 * (1.0 + np.tanh(0.5 * z))
    grad = features.T @ (weights * (response - p)) - ridge * beta
    converged = bool(np.max(np.abs(grad)) <= tolerance)
    return beta, converged, iterations


def _penalized_nll(z, response, weights, ridge, beta):
    loss = float(np.dot(weights, np.logaddexp(0.0, z) - response * z))
    if ridge > 0.0:
        loss += 0.5 * ridge * float(np.dot(beta, beta))
    return loss
