"""Square and logistic losses, empirical risk, and its particle gradient."""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from .model import RELU, Ensemble


class Loss(str, Enum):
    SQUARE = "square"
    LOGISTIC = "logistic"


@dataclass
class Dataset:
    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.array(self.xs, dtype=np.float64, ndmin=2)
        self.ys = np.array(self.ys, dtype=np.float64).reshape(-1)
        if self.xs.shape[0] < 1:
            raise ValueError("dataset needs n >= 1")
        if self.xs.shape[0] != self.ys.shape[0]:
            raise ValueError("xs and ys disagree on n")

    @property
    def n(self):
        return self.xs.shape[0]

    @property
    def d(self):
        return self.xs.shape[1]

    def subset(self, idx):
        return Dataset(self.xs[idx], self.ys[idx])


def loss_value(loss, y, h):
    loss = Loss(loss)
    y = np.asarray(y, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if loss is Loss.SQUARE:
        out = 0.5 * (y - h) ** 2
    else:
        out = np.logaddexp(0.0, -y * h)
    return out if out.ndim else float(out)


def loss_derivative(loss, y, h):
    """Derivative in ``h``."""
    loss = Loss(loss)
    y = np.asarray(y, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if loss is Loss.SQUARE:
        out = h - y
    else:
        # -y / (1 + exp(y h)), written to stay finite for large |y h|
        out = -y * 0.5 * (1.0 - np.tanh(0.5 * y * h))
    return out if out.ndim else float(out)


def loss_second_derivative(loss, y, h):
    loss = Loss(loss)
    y = np.asarray(y, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    if loss is Loss.SQUARE:
        return np.ones_like(h * y)
    p = 0.5 * (1.0 - np.tanh(0.5 * y * h))
    return y * y * p * (1.0 - p)


def risk_gradient_weights(loss, ys, h):
    """Weights g_i = l'(y_i, h(x_i)) / n representing the risk gradient at h."""
    ys = np.asarray(ys, dtype=np.float64)
    return loss_derivative(loss, ys, h) / ys.shape[0]


def empirical_risk(ens, ds, loss, act=RELU, ridge=0.0):
    """Mean loss over ``ds`` plus ``ridge * 0.5 * sum_j |w_j|^2 / m``."""
    h = kernels.predict(ens.W, ds.xs, act.code, act.tau)
    risk = float(np.mean(loss_value(loss, ds.ys, h)))
    if ridge:
        if ridge < 0:
            raise ValueError("ridge must be >= 0")
        risk += ridge * 0.5 * float(np.sum(ens.W * ens.W)) / ens.m
    return risk


def objective_gradient(ens, ds, loss, act=RELU):
    """m times the gradient of the risk in every particle, shape (m, d+1)."""
    h = kernels.predict(ens.W, ds.xs, act.code, act.tau)
    g = risk_gradient_weights(loss, ds.ys, h)
    return kernels.potential_grad(ens.W, ds.xs, g, act.code, act.tau)


def objective(W, ds, loss, act=RELU):
    """Risk as a function of the stacked particle array (for finite differences)."""
    return empirical_risk(Ensemble(W), ds, loss, act)
