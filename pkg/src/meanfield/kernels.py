"""Dispatch to the numba or numpy implementation of the hot loops.

All arrays are float64. ``W`` is (m, d+1) with the output weight in column 0,
``X`` is (n, d), ``g`` is (n,) per-sample risk-gradient weights.
"""
import numpy as np

from . import _kernels_numpy
from ._backend import BACKEND

if BACKEND == "numba":
    from . import _kernels_numba as _impl
else:
    _impl = _kernels_numpy


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def predict(W, X, kind, tau):
    return _impl.predict(_f64(W), _f64(X), int(kind), float(tau))


def potential(W, X, g, kind, tau):
    return _impl.potential(_f64(W), _f64(X), _f64(g), int(kind), float(tau))


def potential_grad(W, X, g, kind, tau):
    return _impl.potential_grad(_f64(W), _f64(X), _f64(g), int(kind), float(tau))


def logistic_gd(A, theta, step, iters, record_every=1):
    return _impl.logistic_gd(_f64(A), _f64(theta), float(step), int(iters), int(record_every))
