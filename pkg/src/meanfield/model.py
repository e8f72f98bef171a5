"""Particle representation of the mean-field two-layer network.

A particle is a vector ``w = (a, b)`` in R^{d+1}: output weight ``a`` followed
by the input weights ``b``. The network is the plain average of the particle
feature maps ``x -> a * sigma(b.x)``.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels

RELU_KIND = 0
SMOOTH_KIND = 1


@dataclass(frozen=True)
class Activation:
    """``relu`` or ``smooth``.

    The smooth variant replaces max(t, 0) by
    ``0.5 * (t + sqrt(t**2 + (tau*|w|)**2)) - 0.5 * tau * |w|``, i.e. the
    surrogate ``0.5*(t + sqrt(t^2 + tau^2)) - tau/2`` applied at unit particle
    norm and extended 1-homogeneously. It is C-infinity away from w = 0.
    """

    kind: str = "relu"
    tau: float = 0.1

    def __post_init__(self):
        if self.kind not in ("relu", "smooth"):
            raise ValueError(f"unknown activation {self.kind!r}")
        if self.kind == "smooth" and not self.tau > 0:
            raise ValueError("smooth activation needs tau > 0")

    @property
    def code(self):
        return RELU_KIND if self.kind == "relu" else SMOOTH_KIND


RELU = Activation("relu")


def smooth(tau=0.1):
    return Activation("smooth", tau)


@dataclass
class Ensemble:
    """m particles stacked as rows of ``W`` with shape (m, d+1)."""

    W: np.ndarray

    def __post_init__(self):
        self.W = np.array(self.W, dtype=np.float64, ndmin=2)
        if self.W.shape[0] < 1:
            raise ValueError("ensemble needs at least one particle")
        if self.W.shape[1] < 2:
            raise ValueError("particles need d >= 1 input weights")
        if not np.all(np.isfinite(self.W)):
            raise ValueError("non-finite particle entries")

    @property
    def m(self):
        return self.W.shape[0]

    @property
    def d(self):
        return self.W.shape[1] - 1

    @property
    def output_weights(self):
        return self.W[:, 0]

    @property
    def input_weights(self):
        return self.W[:, 1:]

    def copy(self):
        return Ensemble(self.W.copy())

    def scaled(self, lam):
        return Ensemble(lam * self.W)

    def merged(self, other):
        if other.d != self.d:
            raise ValueError("cannot merge ensembles of different input dimension")
        return Ensemble(np.vstack([self.W, other.W]))


def _check_x(X, d):
    X = np.asarray(X, dtype=np.float64)
    squeeze = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != d:
        raise ValueError(f"input has dimension {X.shape[1]}, particles expect {d}")
    return X, squeeze


def _check_w(w):
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 1 or w.shape[0] < 2:
        raise ValueError("a particle is a 1-D vector of length d+1 >= 2")
    return w


def psi_eval(w, x, act=RELU):
    """Value of a single particle's feature map at one input (or rows of inputs)."""
    w = _check_w(w)
    X, squeeze = _check_x(x, w.shape[0] - 1)
    # predict averages over particles; with m = 1 that is the particle itself
    out = kernels.predict(w[None, :], X, act.code, act.tau)
    return float(out[0]) if squeeze else out


def psi_grad(w, x, act=RELU):
    """Gradient in ``w`` of ``psi_eval(w, x)``; ReLU uses sigma'(0) = 0."""
    w = _check_w(w)
    X, squeeze = _check_x(x, w.shape[0] - 1)
    if not squeeze:
        return np.stack([kernels.potential_grad(w[None, :], X[i:i + 1], np.ones(1), act.code, act.tau)[0]
                         for i in range(X.shape[0])])
    return kernels.potential_grad(w[None, :], X, np.ones(1), act.code, act.tau)[0]


def predict(ens, X, act=RELU):
    """Network output ``(1/m) sum_j psi(w_j)(x)`` for one input or rows of inputs."""
    X, squeeze = _check_x(X, ens.d)
    h = kernels.predict(ens.W, X, act.code, act.tau)
    return float(h[0]) if squeeze else h


def sphere_directions(rng, count, dim):
    """``count`` points uniform on the unit sphere of R^dim."""
    v = rng.standard_normal((count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def init_ensemble(m, d, rng):
    """Input weights uniform on S^{d-1}, output weights uniform in {-1, +1}.

    Every particle then has norm sqrt(2) and |a| * b lies on the unit circle.
    """
    B = sphere_directions(rng, m, d)
    a = rng.choice(np.array([-1.0, 1.0]), size=m)
    return Ensemble(np.column_stack([a, B]))
