"""Fixed random ReLU features, their kernels, and hard-margin solvers.

Only the output layer is trained here: the model is linear in the features
``phi(x)_j = max(theta_j . x, 0) / sqrt(m)`` with frozen unit directions.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from . import kernels
from .model import sphere_directions


class InfeasibleError(ValueError):
    """The labels cannot be separated with margin >= 1."""


class NotPSDError(ValueError):
    pass


@dataclass
class RandomFeatures:
    directions: np.ndarray  # (m, d), unit rows

    @property
    def m(self):
        return self.directions.shape[0]

    @property
    def d(self):
        return self.directions.shape[1]

    def __call__(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return np.maximum(X @ self.directions.T, 0.0) / np.sqrt(self.m)


def random_features(m, d, rng):
    return RandomFeatures(sphere_directions(rng, m, d))


def empirical_kernel(rf, x, xp, chunk=200_000):
    """Phi(x) . Phi(x'), accumulated in chunks of directions to bound memory."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    acc = 0.0
    for start in range(0, rf.m, chunk):
        D = rf.directions[start:start + chunk]
        acc += float(np.maximum(D @ x, 0.0) @ np.maximum(D @ xp, 0.0))
    return acc / rf.m


def closed_form_kernel(x, xp, d=None):
    """E[max(eta.x, 0) max(eta.x', 0)] for eta uniform on S^{d-1}.

    Equals |x||x'| (sin t + (pi - t) cos t) / (2 pi d), t the angle between x, x'.
    """
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    d = x.shape[0] if d is None else d
    nx, nxp = np.linalg.norm(x), np.linalg.norm(xp)
    if nx == 0 or nxp == 0:
        raise ValueError("closed-form kernel needs nonzero inputs")
    c = np.clip(x @ xp / (nx * nxp), -1.0, 1.0)
    t = np.arccos(c)
    return float(nx * nxp * (np.sin(t) + (np.pi - t) * c) / (2.0 * np.pi * d))


def closed_form_gram(X, Y=None):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    nx = np.linalg.norm(X, axis=1)
    ny = np.linalg.norm(Y, axis=1)
    if np.any(nx == 0) or np.any(ny == 0):
        raise ValueError("closed-form kernel needs nonzero inputs")
    c = np.clip((X @ Y.T) / np.outer(nx, ny), -1.0, 1.0)
    t = np.arccos(c)
    return np.outer(nx, ny) * (np.sin(t) + (np.pi - t) * c) / (2.0 * np.pi * X.shape[1])


def monte_carlo_kernel(x, xp, samples, rng, chunk=1_000_000):
    """Plain Monte Carlo estimate of the limit kernel and its standard error."""
    x = np.asarray(x, dtype=np.float64)
    xp = np.asarray(xp, dtype=np.float64)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        c = min(chunk, samples - done)
        eta = sphere_directions(rng, c, x.shape[0])
        v = np.maximum(eta @ x, 0.0) * np.maximum(eta @ xp, 0.0)
        total += float(v.sum())
        total_sq += float(v @ v)
        done += c
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return mean, np.sqrt(var / samples)


def check_psd(K, rel=1e-10):
    K = np.asarray(K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise NotPSDError("kernel matrix must be square")
    if not np.allclose(K, K.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(K).max())):
        raise NotPSDError("kernel matrix is not symmetric")
    n = K.shape[0]
    lam = np.linalg.eigvalsh(0.5 * (K + K.T))[0]
    if lam < -rel * max(np.trace(K) / n, np.finfo(float).tiny):
        raise NotPSDError(f"kernel matrix has eigenvalue {lam:.3g}")
    return lam


def _separable(M):
    """Is there v with M v >= 1 row-wise? Exact LP feasibility test."""
    n, p = M.shape
    res = linprog(np.zeros(p), A_ub=-M, b_ub=-np.ones(n), bounds=[(None, None)] * p,
                  method="highs")
    return res.status == 0


def _dual_projected_gradient(Q, iters, tol):
    """Accelerated projected gradient for min 0.5 b'Qb - 1'b over b >= 0."""
    n = Q.shape[0]
    L = max(np.linalg.eigvalsh(Q)[-1], 1e-300)
    beta = np.zeros(n)
    z = beta.copy()
    t = 1.0
    for _ in range(iters):
        nxt = np.maximum(z - (Q @ z - 1.0) / L, 0.0)
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        z = nxt + ((t - 1.0) / t_next) * (nxt - beta)
        beta, t = nxt, t_next
        grad = Q @ beta - 1.0
        # projected-gradient stationarity
        if np.max(np.abs(np.where(beta > 0, grad, np.minimum(grad, 0.0)))) < tol:
            break
    return beta


def _polish(Q, beta, tol, max_rounds=None):
    """Active-set refinement: solve Q_SS b_S = 1 exactly on the support."""
    n = Q.shape[0]
    max_rounds = 4 * n + 10 if max_rounds is None else max_rounds
    S = beta > 1e-9 * max(beta.max(), 1e-300)
    for _ in range(max_rounds):
        b = np.zeros(n)
        if S.any():
            b[S] = np.linalg.lstsq(Q[np.ix_(S, S)], np.ones(S.sum()), rcond=None)[0]
        neg = S & (b <= 0)
        if neg.any():
            S[np.argmin(np.where(neg, b, np.inf))] = False
            continue
        grad = Q @ b - 1.0
        viol = ~S & (grad < -tol)
        if not viol.any():
            return b
        S[np.argmin(np.where(viol, grad, np.inf))] = True
    return beta


def max_margin_qp(K, ys, tol=1e-8, iters=100_000):
    """min a'Ka subject to y_i (K a)_i >= 1. Returns ``(alpha, a'Ka)``."""
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if not np.all(np.abs(y) == 1):
        raise ValueError("labels must be +-1")
    check_psd(K)
    if not _separable(y[:, None] * K):
        raise InfeasibleError("labels are not separable with this kernel")
    Q = np.outer(y, y) * K
    beta = _dual_projected_gradient(Q, iters, tol)
    beta = _polish(Q, beta, tol)
    alpha = y * beta
    return alpha, float(alpha @ K @ alpha)


def kkt_residuals(K, ys, alpha):
    """Primal feasibility, dual sign, and complementary slackness violations."""
    y = np.asarray(ys, dtype=np.float64)
    beta = y * alpha
    margin = y * (K @ alpha)
    return {
        "primal": float(np.max(np.maximum(1.0 - margin, 0.0))),
        "dual": float(np.max(np.maximum(-beta, 0.0))),
        "slackness": float(np.max(np.abs(beta * (margin - 1.0)))),
    }


def max_margin_linear(X, ys, tol=1e-10):
    """min |theta|^2 subject to y_i theta . x_i >= 1, solved in the primal.

    Returns ``(theta, 1/|theta|)``; the second value is the geometric margin.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(ys, dtype=np.float64)
    A = y[:, None] * X
    if not _separable(A):
        raise InfeasibleError("data are not linearly separable through the origin")
    # any feasible point is a valid start
    start = linprog(np.zeros(X.shape[1]), A_ub=-A, b_ub=-np.ones(len(y)),
                    bounds=[(None, None)] * X.shape[1], method="highs").x
    res = minimize(lambda t: t @ t, start, jac=lambda t: 2 * t, method="SLSQP",
                   constraints=[{"type": "ineq", "fun": lambda t: A @ t - 1.0, "jac": lambda t: A}],
                   options={"ftol": 1e-14, "maxiter": 1000})
    theta = res.x
    # polish: minimum-norm solution of the active constraints, kept if it is a KKT point
    active = A @ theta <= 1.0 + 1e-6
    for _ in range(len(y) + 1):
        As = A[active]
        lam = np.linalg.lstsq(As @ As.T, np.ones(active.sum()), rcond=None)[0]
        cand = As.T @ lam
        if np.all(A @ cand >= 1.0 - tol) and np.all(lam >= -tol):
            theta = cand
            break
        if np.any(lam < -tol):
            idx = np.flatnonzero(active)[np.argmin(lam)]
            active[idx] = False
        else:
            break
    return theta, float(1.0 / np.linalg.norm(theta))


def train_linear_logistic(Phi, ys, step, iters, record_every=1, theta0=None):
    """Gradient descent on the mean logistic loss of the linear model theta . phi.

    Returns the final parameters and the (k, p) array of recorded iterates,
    starting with ``theta0`` (zeros by default).
    """
    Phi = np.atleast_2d(np.asarray(Phi, dtype=np.float64))
    y = np.asarray(ys, dtype=np.float64)
    theta0 = np.zeros(Phi.shape[1]) if theta0 is None else np.asarray(theta0, dtype=np.float64)
    theta, snaps = kernels.logistic_gd(y[:, None] * Phi, theta0, step, iters, record_every)
    if not np.all(np.isfinite(theta)):
        raise FloatingPointError("logistic descent diverged")
    return theta, snaps


def normalized_directions(snaps):
    norms = np.linalg.norm(snaps, axis=1)
    keep = norms > 0
    return snaps[keep] / norms[keep, None]


def train_output_layer(rf, ds, cfg):
    """Train only the output weights on the logistic loss with fixed features.

    Returns ``(theta2, directions)`` where ``directions`` holds the recorded
    nonzero iterates normalized to the unit sphere.
    """
    Phi = rf(ds.xs)
    theta, snaps = train_linear_logistic(Phi, ds.ys, cfg.step, cfg.iterations, cfg.record_every)
    return theta, normalized_directions(snaps)


def min_normalized_margin(Phi, ys, thetas):
    """min_i y_i theta . phi(x_i) / |theta| for each row of ``thetas``."""
    thetas = np.atleast_2d(thetas)
    z = (np.asarray(ys)[:, None] * (Phi @ thetas.T))
    return z.min(axis=0) / np.linalg.norm(thetas, axis=1)
