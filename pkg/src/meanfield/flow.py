"""Fixed-step gradient descent on ensembles (full batch or fresh-sample SGD).

Each step is ``w_j <- w_j - step * m * grad_{w_j} G``, the explicit Euler
scheme for the particle gradient flow at time ``k * step``.
"""
from dataclasses import dataclass, field

import numpy as np

from .losses import empirical_risk, objective_gradient
from .model import RELU, Ensemble

DIVERGENCE_RISK = 1e12


class DivergenceError(FloatingPointError):
    pass


@dataclass
class FlowConfig:
    step: float
    iterations: int
    mode: str = "full"  # "full" or "sgd"
    batch: int = 100
    record_every: int = 1
    seed: int = 0
    train: str = "both"  # "both" or "output"
    eval_size: int = 10_000

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.mode not in ("full", "sgd"):
            raise ValueError(f"mode must be 'full' or 'sgd', got {self.mode!r}")
        if self.batch < 1 or self.record_every < 1:
            raise ValueError("batch and record_every must be >= 1")
        if self.train not in ("both", "output"):
            raise ValueError(f"train must be 'both' or 'output', got {self.train!r}")


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    risks: list = field(default_factory=list)
    final: Ensemble = None
    diverged: bool = False
    message: str = ""

    def record(self, t, ens, risk):
        self.times.append(float(t))
        self.snapshots.append(ens.W.copy())
        self.risks.append(float(risk))


def gd_step(ens, ds, loss, act=RELU, step=1e-2, train="both"):
    """One Euler step; ``train="output"`` freezes the input weights."""
    if not step > 0:
        raise ValueError("step must be > 0")
    grad = objective_gradient(ens, ds, loss, act)
    if not np.all(np.isfinite(grad)):
        raise DivergenceError("non-finite gradient")
    if train == "output":
        grad[:, 1:] = 0.0
    W = ens.W - step * grad
    if not np.all(np.isfinite(W)):
        raise DivergenceError("non-finite particles after step")
    return Ensemble(W)


def _run(e0, next_batch, risk_of, loss, act, cfg):
    traj = Trajectory()
    ens = e0.copy()
    traj.record(0.0, ens, risk_of(ens))
    for k in range(1, cfg.iterations + 1):
        try:
            ens = gd_step(ens, next_batch(), loss, act, cfg.step, cfg.train)
        except DivergenceError as exc:
            traj.diverged, traj.message = True, f"step {k}: {exc}"
            break
        if k % cfg.record_every == 0 or k == cfg.iterations:
            risk = risk_of(ens)
            if not np.isfinite(risk) or risk > DIVERGENCE_RISK:
                traj.diverged, traj.message = True, f"step {k}: risk {risk:.3g}"
                traj.record(k * cfg.step, ens, risk if np.isfinite(risk) else np.inf)
                break
            traj.record(k * cfg.step, ens, risk)
    traj.final = ens
    return traj


def run_flow(e0, ds, loss, act=RELU, cfg=None):
    """Full-batch descent on a fixed dataset; risk snapshots are the training risk."""
    return _run(e0, lambda: ds, lambda e: empirical_risk(e, ds, loss, act), loss, act, cfg)


def run_sgd(e0, dist, loss, act=RELU, cfg=None, eval_set=None):
    """Each step draws a fresh minibatch of ``cfg.batch`` samples from ``dist``.

    Risk snapshots use a held-out set of ``cfg.eval_size`` samples drawn from
    its own substream unless ``eval_set`` is given.
    """
    ss_batch, ss_eval = np.random.SeedSequence(cfg.seed).spawn(2)
    rng = np.random.default_rng(ss_batch)
    if eval_set is None:
        eval_set = dist.sample(cfg.eval_size, np.random.default_rng(ss_eval))
    return _run(e0, lambda: dist.sample(cfg.batch, rng),
                lambda e: empirical_risk(e, eval_set, loss, act), loss, act, cfg)
