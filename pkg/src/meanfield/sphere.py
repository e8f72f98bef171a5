"""Polar form w = r * eta of the particle flow, integrated on the sphere.

With a 2-homogeneous feature map the Cartesian flow is equivalent to
``dr/dt = -2 r J(eta)`` and ``deta/dt = -(I - eta eta^T) grad J(eta)``, where J
is the mean potential of the measure nu = (1/m) sum_j r_j^2 delta_{eta_j}.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .flow import DivergenceError, gd_step
from .losses import risk_gradient_weights
from .model import RELU, Ensemble


@dataclass
class PolarEnsemble:
    r: np.ndarray  # (m,)
    eta: np.ndarray  # (m, d+1), unit rows

    def __post_init__(self):
        self.r = np.array(self.r, dtype=np.float64).reshape(-1)
        self.eta = np.array(self.eta, dtype=np.float64, ndmin=2)
        if self.eta.shape[0] != self.r.shape[0]:
            raise ValueError("r and eta disagree on m")

    @property
    def m(self):
        return self.r.shape[0]

    @property
    def mass(self):
        """Total mass of nu."""
        return float(np.sum(self.r ** 2) / self.m)

    def to_ensemble(self):
        return Ensemble(self.r[:, None] * self.eta)


def polar_decompose(w):
    """Return ``(r, eta)`` for one particle, or a PolarEnsemble for an Ensemble."""
    if isinstance(w, Ensemble):
        r = np.linalg.norm(w.W, axis=1)
        if np.any(r == 0):
            raise ValueError("zero particle has no direction")
        return PolarEnsemble(r, w.W / r[:, None])
    w = np.asarray(w, dtype=np.float64)
    r = float(np.linalg.norm(w))
    if r == 0:
        raise ValueError("zero particle has no direction")
    return r, w / r


def recompose(r, eta=None):
    if isinstance(r, PolarEnsemble):
        return r.to_ensemble()
    return r * np.asarray(eta, dtype=np.float64)


def _potential_on_support(pe, ds, loss, act):
    W = pe.r[:, None] * pe.eta
    h = kernels.predict(W, ds.xs, act.code, act.tau)
    g = risk_gradient_weights(loss, ds.ys, h)
    J = kernels.potential(pe.eta, ds.xs, g, act.code, act.tau)
    gradJ = kernels.potential_grad(pe.eta, ds.xs, g, act.code, act.tau)
    return J, gradJ


def _tangent(eta, v):
    return v - np.sum(eta * v, axis=1, keepdims=True) * eta


def polar_step(pe, ds, loss, act=RELU, step=1e-3):
    """Projected Euler step of the (r, eta) dynamics; eta is renormalized."""
    if not step > 0:
        raise ValueError("step must be > 0")
    J, gradJ = _potential_on_support(pe, ds, loss, act)
    if not (np.all(np.isfinite(J)) and np.all(np.isfinite(gradJ))):
        raise DivergenceError("non-finite potential")
    r = pe.r - step * 2.0 * pe.r * J
    eta = pe.eta - step * _tangent(pe.eta, gradJ)
    eta /= np.linalg.norm(eta, axis=1, keepdims=True)
    return PolarEnsemble(r, eta)


def equivalence_check(e0, ds, loss, act, step, horizon, probes):
    """Largest gap between Cartesian and polar predictions on ``probes``.

    Both schemes start from ``e0`` and take ``round(horizon / step)`` steps;
    the gap is taken over every step, including t = 0.
    """
    probes = np.atleast_2d(np.asarray(probes, dtype=np.float64))
    steps = int(round(horizon / step))
    pol = polar_decompose(e0)
    # start both schemes from the same floats so the t = 0 gap is exactly 0
    cart = pol.to_ensemble()
    worst = 0.0
    for k in range(steps + 1):
        hc = kernels.predict(cart.W, probes, act.code, act.tau)
        hp = kernels.predict(pol.r[:, None] * pol.eta, probes, act.code, act.tau)
        gap = float(np.max(np.abs(hc - hp)))
        if not np.isfinite(gap):
            raise DivergenceError(f"non-finite prediction at step {k}")
        worst = max(worst, gap)
        if k < steps:
            cart = gd_step(cart, ds, loss, act, step)
            pol = polar_step(pol, ds, loss, act, step)
    return worst


def nu_integral(pe, values):
    """Integral against nu of per-particle values: (1/m) sum_j r_j^2 values_j."""
    return float(np.sum(pe.r ** 2 * values) / pe.m)


def mass_evolution_check(pe, ds, loss, act, f, grad_f, step):
    """Compare the one-step finite-difference rate of a(t) = int f dnu with
    ``-4 int f J dnu - int grad_f^T (I - eta eta^T) grad J dnu``.

    ``f`` maps (m, d+1) directions to (m,) values, ``grad_f`` to (m, d+1).
    Returns ``(lhs, rhs)``.
    """
    J, gradJ = _potential_on_support(pe, ds, loss, act)
    a0 = nu_integral(pe, f(pe.eta))
    nxt = polar_step(pe, ds, loss, act, step)
    lhs = (nu_integral(nxt, f(nxt.eta)) - a0) / step
    flux = np.sum(grad_f(pe.eta) * _tangent(pe.eta, gradJ), axis=1)
    rhs = -4.0 * nu_integral(pe, f(pe.eta) * J) - nu_integral(pe, flux)
    return lhs, rhs
