# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled weighted estimator kernels.

Mirrors ``py_backend`` formula for formula (same sigmoid, same penalized
objective, same damping rule); the hot loops run without the GIL so the
drivers' thread pools get real parallelism.
"""

import numpy as np

from numpy.linalg import LinAlgError

from libc.math cimport exp, fabs, log1p, sqrt, tanh

cdef double _RCOND = 1e-12


cdef int _cholesky(double[:, ::1] a, int d) noexcept nogil:
    """In-place lower Cholesky; returns 1 if the matrix looks singular."""
    cdef int i, j, k
    cdef double s, scale = 0.0
    for i in range(d):
        if a[i, i] > scale:
            scale = a[i, i]
    if scale <= 0.0:
        return 1
    for j in range(d):
        s = a[j, j]
        for k in range(j):
            s -= a[j, k] * a[j, k]
        if s <= _RCOND * scale:
            return 1
        a[j, j] = sqrt(s)
        for i in range(j + 1, d):
            s = a[i, j]
            for k in range(j):
                s -= a[i, k] * a[j, k]
            a[i, j] = s / a[j, j]
    return 0


cdef void _cho_solve(double[:, ::1] l, double[::1] rhs, double[::1] out, int d) noexcept nogil:
    cdef int i, k
    cdef double s
    for i in range(d):
        s = rhs[i]
        for k in range(i):
            s -= l[i, k] * out[k]
        out[i] = s / l[i, i]
    for i in range(d - 1, -1, -1):
        s = out[i]
        for k in range(i + 1, d):
            s -= l[k, i] * out[k]
        out[i] = s / l[i, i]


cdef double _penalized_nll(double[:, ::1] x, double[::1] y, double[::1] w,
                           double ridge, double[::1] beta, double[::1] z,
                           int m, int d) noexcept nogil:
    cdef int i
    cdef double loss = 0.0, zi, pos
    for i in range(m):
        zi = z[i]
        pos = zi if zi > 0.0 else 0.0
        loss += w[i] * (log1p(exp(-fabs(zi))) + pos - y[i] * zi)
    if ridge > 0.0:
        for i in range(d):
            loss += 0.5 * ridge * beta[i] * beta[i]
    return loss


cdef void _matvec(double[:, ::1] x, double[::1] beta, double[::1] out,
                  int m, int d) noexcept nogil:
    cdef int i, j
    cdef double s
    for i in range(m):
        s = 0.0
        for j in range(d):
            s += x[i, j] * beta[j]
        out[i] = s


def weighted_mean(double[:, ::1] features, double[::1] weights):
    cdef int m = features.shape[0]
    cdef int d = features.shape[1]
    out_arr = np.zeros(d)
    cdef double[::1] out = out_arr
    cdef double total = 0.0, wi
    cdef int i, j
    with nogil:
        for i in range(m):
            wi = weights[i]
            total += wi
            for j in range(d):
                out[j] += wi * features[i, j]
        for j in range(d):
            out[j] /= total
    return out_arr


def weighted_least_squares(double[:, ::1] features, double[::1] response,
                           double[::1] weights, double ridge):
    cdef int m = features.shape[0]
    cdef int d = features.shape[1]
    gram_arr = np.zeros((d, d))
    rhs_arr = np.zeros(d)
    beta_arr = np.zeros(d)
    cdef double[:, ::1] gram = gram_arr
    cdef double[::1] rhs = rhs_arr
    cdef double[::1] beta = beta_arr
    cdef int i, j, k, status
    cdef double wi, wy
    with nogil:
        for i in range(m):
            wi = weights[i]
            wy = wi * response[i]
            for j in range(d):
                rhs[j] += wy * features[i, j]
                for k in range(j, d):
                    gram[j, k] += wi * features[i, j] * features[i, k]
        for j in range(d):
            if ridge > 0.0:
                gram[j, j] += ridge
            for k in range(j, d):
                gram[k, j] = gram[j, k]
        status = _cholesky(gram, d)
        if status == 0:
            _cho_solve(gram, rhs, beta, d)
    if status:
        raise LinAlgError("matrix is singular or not positive definite")
    return beta_arr


def weighted_logistic_newton(double[:, ::1] features, double[::1] response,
                             double[::1] weights, double ridge,
                             double tolerance, int max_iterations):
    cdef int m = features.shape[0]
    cdef int d = features.shape[1]
    beta_arr = np.zeros(d)
    cdef double[::1] beta = beta_arr
    cdef double[::1] z = np.zeros(m)
    cdef double[::1] p = np.zeros(m)
    cdef double[::1] grad = np.zeros(d)
    cdef double[:, ::1] hess = np.zeros((d, d))
    cdef double[::1] delta = np.zeros(d)
    cdef double[::1] cand = np.zeros(d)
    cdef double[::1] zc = np.zeros(m)
    cdef double nll, nll_c, step, gmax, ci, resid, slack
    cdef int i, j, k, it, halve, status = 0, converged = 0, improved
    cdef int iterations = 0

    with nogil:
        nll = _penalized_nll(features, response, weights, ridge, beta, z, m, d)
        for it in range(1, max_iterations + 1):
            iterations = it
            for i in range(m):
                p[i] = 0.5 * (1.0 + tanh(0.5 * z[i]))
            gmax = 0.0
            for j in range(d):
                grad[j] = -ridge * beta[j]
            for i in range(m):
                resid = weights[i] * (response[i] - p[i])
                for j in range(d):
                    grad[j] += resid * features[i, j]
            for j in range(d):
                if fabs(grad[j]) > gmax:
                    gmax = fabs(grad[j])
            if gmax <= tolerance:
                converged = 1
                iterations = it - 1
                break
            for j in range(d):
                for k in range(d):
                    hess[j, k] = 0.0
            for i in range(m):
                ci = weights[i] * p[i] * (1.0 - p[i])
                for j in range(d):
                    for k in range(j, d):
                        hess[j, k] += ci * features[i, j] * features[i, k]
            for j in range(d):
                if ridge > 0.0:
                    hess[j, j] += ridge
                for k in range(j, d):
                    hess[k, j] = hess[j, k]
            status = _cholesky(hess, d)
            if status:
                break
            _cho_solve(hess, grad, delta, d)
            # Accept within a machine-precision slack: near the optimum
            # the true decrease per step is far below the float resolution
            # of the objective, and an exact <= test would stall the
            # gradient above the tolerance.
            slack = 1e-12 * (1.0 + fabs(nll))
            step = 1.0
            improved = 0
            for halve in range(31):
                for j in range(d):
                    cand[j] = beta[j] + step * delta[j]
                _matvec(features, cand, zc, m, d)
                nll_c = _penalized_nll(features, response, weights, ridge, cand, zc, m, d)
                if nll_c <= nll + slack:
                    for j in range(d):
                        beta[j] = cand[j]
                    for i in range(m):
                        z[i] = zc[i]
                    nll = nll_c
                    improved = 1
                    break
                step *= 0.5
            if not improved:
                break
        if not converged and not status:
            for i in range(m):
                p[i] = 0.5 * (1.0 + tanh(0.5 * z[i]))
            gmax = 0.0
            for j in range(d):
                grad[j] = -ridge * beta[j]
            for i in range(m):
                resid = weights[i] * (response[i] - p[i])
                for j in range(d):
                    grad[j] += resid * features[i, j]
            for j in range(d):
                if fabs(grad[j]) > gmax:
                    gmax = fabs(grad[j])
            if gmax <= tolerance:
                converged = 1
    if status:
        raise LinAlgError("matrix is singular or not positive definite")
    return beta_arr, bool(converged), iterations
