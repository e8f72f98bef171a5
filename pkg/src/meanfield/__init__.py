"""Particle gradient flows for mean-field two-layer ReLU networks."""
from ._backend import BACKEND
from .losses import Dataset, Loss, empirical_risk, objective_gradient
from .model import RELU, Activation, Ensemble, init_ensemble, predict, psi_eval, psi_grad, smooth

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "RELU", "Activation", "Dataset", "Ensemble", "Loss", "empirical_risk",
    "init_ensemble", "objective_gradient", "predict", "psi_eval", "psi_grad", "smooth",
]
