"""Mean potential J(w | mu) and the first-order global-optimality certificate.

For an empirical risk, J(w | mu) = sum_i g_i * psi(w)(x_i) with g_i the risk
gradient weights of the predictor defined by mu. A measure on the sphere is a
global minimizer iff J >= 0 everywhere and J = 0 on its support; the
certificate checks both numerically, the first only on finitely many probes.
"""
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .losses import risk_gradient_weights
from .model import RELU, Ensemble, sphere_directions
from .sphere import PolarEnsemble

CERTIFIED = "CertifiedUpToProbes"
VIOLATED = "Violated"


def _weights(state, ds, loss, act):
    if isinstance(state, PolarEnsemble):
        state = state.to_ensemble()
    if not isinstance(state, Ensemble):
        raise TypeError("state must be an Ensemble or PolarEnsemble")
    h = kernels.predict(state.W, ds.xs, act.code, act.tau)
    return risk_gradient_weights(loss, ds.ys, h)


def _rows(w):
    w = np.asarray(w, dtype=np.float64)
    return np.atleast_2d(w), w.ndim == 1


def mean_potential(w, state, ds, loss, act=RELU):
    """J at one point (d+1,) or at each row of a (k, d+1) array."""
    W, single = _rows(w)
    J = kernels.potential(W, ds.xs, _weights(state, ds, loss, act), act.code, act.tau)
    return float(J[0]) if single else J


def mean_potential_grad(w, state, ds, loss, act=RELU):
    W, single = _rows(w)
    G = kernels.potential_grad(W, ds.xs, _weights(state, ds, loss, act), act.code, act.tau)
    return G[0] if single else G


@dataclass
class CertificateReport:
    min_probe_J: float
    min_raw_probe_J: float
    max_abs_support_J: float
    n_probes: int
    n_support: int
    tol_probe: float
    tol_support: float
    verdict: str

    def to_dict(self):
        return asdict(self)


def _refine(eta, X, g, act, step, iters):
    for _ in range(iters):
        grad = kernels.potential_grad(eta, X, g, act.code, act.tau)
        grad -= np.sum(grad * eta, axis=1, keepdims=True) * eta
        eta = eta - step * grad
        eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    return eta


def optimality_certificate(ens, ds, loss, act=RELU, n_probes=1000, seed=0,
                           tol_probe=1e-3, tol_support=1e-3, mass_cutoff=1e-8,
                           refine_count=10, refine_step=1e-2, refine_iters=200):
    """Check J >= -tol_probe on probe directions and |J| <= tol_support on the support.

    Probes are uniform on S^d; the ``refine_count`` lowest are then pushed
    down by projected gradient descent of J on the sphere. The support is
    every particle with r_j^2 >= mass_cutoff * max_k r_k^2, evaluated at its
    direction.
    """
    if n_probes < 1:
        raise ValueError("n_probes must be >= 1")
    g = _weights(ens, ds, loss, act)
    X = ds.xs
    probes = sphere_directions(np.random.default_rng(seed), n_probes, ens.d + 1)
    J = kernels.potential(probes, X, g, act.code, act.tau)
    raw_min = float(np.min(J))
    best = raw_min
    if refine_count > 0 and refine_iters > 0:
        worst = np.argsort(J, kind="stable")[:refine_count]
        eta = _refine(probes[worst], X, g, act, refine_step, refine_iters)
        best = min(best, float(np.min(kernels.potential(eta, X, g, act.code, act.tau))))

    r2 = np.sum(ens.W ** 2, axis=1)
    keep = r2 >= mass_cutoff * np.max(r2)
    directions = ens.W[keep] / np.sqrt(r2[keep])[:, None]
    J_support = kernels.potential(directions, X, g, act.code, act.tau)
    max_support = float(np.max(np.abs(J_support))) if J_support.size else 0.0

    ok = best >= -tol_probe and max_support <= tol_support
    return CertificateReport(best, raw_min, max_support, int(n_probes), int(keep.sum()),
                             float(tol_probe), float(tol_support), CERTIFIED if ok else VIOLATED)
