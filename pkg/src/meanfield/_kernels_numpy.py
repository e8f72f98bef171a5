"""Pure-numpy kernels. Reference path; the numba kernels must agree with these."""
import numpy as np

RELU = 0
SMOOTH = 1


def _parts(W, X, kind, tau):
    a = W[:, 0]
    B = W[:, 1:]
    pre = X @ B.T  # (n, m)
    if kind == RELU:
        return a, B, pre, np.maximum(pre, 0.0), None, None, None
    norm = np.sqrt(np.einsum("ij,ij->i", W, W))
    q = np.sqrt(pre * pre + (tau * norm) ** 2)
    s = 0.5 * (pre + q) - 0.5 * tau * norm
    return a, B, pre, s, norm, q, None


def predict(W, X, kind, tau):
    a, _, _, s, _, _, _ = _parts(W, X, kind, tau)
    return s @ a / W.shape[0]


def potential(W, X, g, kind, tau):
    a, _, _, s, _, _, _ = _parts(W, X, kind, tau)
    return a * (g @ s)


def potential_grad(W, X, g, kind, tau):
    a, B, pre, s, norm, q, _ = _parts(W, X, kind, tau)
    out = np.empty_like(W)
    if kind == RELU:
        active = (pre > 0.0).astype(W.dtype)
        out[:, 0] = g @ s
        out[:, 1:] = a[:, None] * ((g[:, None] * active).T @ X)
        return out
    alive = norm > 0.0
    safe_q = np.where(q > 0.0, q, 1.0)
    ds_dt = np.where(q > 0.0, 0.5 * (1.0 + pre / safe_q), 0.5)
    ds_dn = np.where(q > 0.0, 0.5 * tau * tau * norm / safe_q, 0.0) - 0.5 * tau
    radial = g @ ds_dn  # (m,)
    inv_norm = np.where(alive, 1.0 / np.where(alive, norm, 1.0), 0.0)
    out[:, 0] = g @ s + a * radial * a * inv_norm
    out[:, 1:] = a[:, None] * ((g[:, None] * ds_dt).T @ X + (radial * inv_norm)[:, None] * B)
    out[~alive] = 0.0
    return out


def logistic_gd(A, theta, step, iters, record_every):
    """Gradient descent on mean(log(1 + exp(-A @ theta))); A rows are y_i * phi(x_i)."""
    n = A.shape[0]
    theta = theta.copy()
    snaps = [theta.copy()]
    for k in range(1, iters + 1):
        z = A @ theta
        # d/dz log(1+exp(-z)) = -1/(1+exp(z))
        w = -0.5 * (1.0 - np.tanh(0.5 * z))
        theta -= step * (w @ A) / n
        if k % record_every == 0:
            snaps.append(theta.copy())
    return theta, np.array(snaps)
