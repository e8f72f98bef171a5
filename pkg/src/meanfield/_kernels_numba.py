"""numba versions of the hot loops. Matrix products go through BLAS; the
elementwise work is fused into serial loops so results do not depend on
thread scheduling."""
import math

import numpy as np
from numba import njit

RELU = 0
SMOOTH = 1


@njit(cache=True)
def _preacts(W, X):
    # BLAS for the (n, m) preactivations; the loops below fuse the rest
    return np.dot(X, np.ascontiguousarray(W[:, 1:]).T)


@njit(cache=True)
def _norms(W):
    m, p = W.shape
    out = np.empty(m)
    for j in range(m):
        acc = 0.0
        for k in range(p):
            acc += W[j, k] * W[j, k]
        out[j] = math.sqrt(acc)
    return out


@njit(cache=True)
def _act(t, nrm, kind, tau):
    if kind == RELU:
        return t if t > 0.0 else 0.0
    return 0.5 * (t + math.sqrt(t * t + tau * tau * nrm * nrm)) - 0.5 * tau * nrm


@njit(cache=True)
def predict(W, X, kind, tau):
    n = X.shape[0]
    m = W.shape[0]
    pre = _preacts(W, X)
    nrm = _norms(W)
    h = np.zeros(n)
    for i in range(n):
        acc = 0.0
        for j in range(m):
            acc += W[j, 0] * _act(pre[i, j], nrm[j], kind, tau)
        h[i] = acc / m
    return h


@njit(cache=True)
def potential(W, X, g, kind, tau):
    n = X.shape[0]
    m = W.shape[0]
    pre = _preacts(W, X)
    nrm = _norms(W)
    acc = np.zeros(m)
    for i in range(n):
        for j in range(m):
            acc[j] += g[i] * _act(pre[i, j], nrm[j], kind, tau)
    return W[:, 0] * acc


@njit(cache=True)
def potential_grad(W, X, g, kind, tau):
    n, d = X.shape
    m = W.shape[0]
    pre = _preacts(W, X)
    nrm = _norms(W)
    coef = np.empty((n, m))  # g_i * ds/dt
    val = np.zeros(m)
    radial = np.zeros(m)
    for i in range(n):
        for j in range(m):
            t = pre[i, j]
            if kind == RELU:
                if t > 0.0:
                    coef[i, j] = g[i]
                    val[j] += g[i] * t
                else:
                    coef[i, j] = 0.0
            else:
                q = math.sqrt(t * t + tau * tau * nrm[j] * nrm[j])
                if q > 0.0:
                    coef[i, j] = g[i] * 0.5 * (1.0 + t / q)
                    radial[j] += g[i] * (0.5 * tau * tau * nrm[j] / q - 0.5 * tau)
                else:
                    coef[i, j] = 0.5 * g[i]
                    radial[j] -= g[i] * 0.5 * tau
                val[j] += g[i] * (0.5 * (t + q) - 0.5 * tau * nrm[j])
    inner = np.dot(coef.T, X)  # (m, d)
    out = np.empty((m, d + 1))
    for j in range(m):
        a = W[j, 0]
        if kind == SMOOTH and nrm[j] == 0.0:
            for k in range(d + 1):
                out[j, k] = 0.0
            continue
        out[j, 0] = val[j]
        for k in range(d):
            out[j, k + 1] = a * inner[j, k]
        if kind == SMOOTH:
            r = a * radial[j] / nrm[j]
            out[j, 0] += r * a
            for k in range(d):
                out[j, k + 1] += r * W[j, k + 1]
    return out


@njit(cache=True)
def logistic_gd(A, theta, step, iters, record_every):
    n, p = A.shape
    theta = theta.copy()
    snaps = np.empty((iters // record_every + 1, p))
    snaps[0] = theta
    grad = np.empty(p)
    row = 1
    for it in range(1, iters + 1):
        for k in range(p):
            grad[k] = 0.0
        for i in range(n):
            z = 0.0
            for k in range(p):
                z += A[i, k] * theta[k]
            w = -0.5 * (1.0 - math.tanh(0.5 * z))
            for k in range(p):
                grad[k] += w * A[i, k]
        for k in range(p):
            theta[k] -= step * grad[k] / n
        if it % record_every == 0:
            snaps[row] = theta
            row += 1
    return theta, snaps
