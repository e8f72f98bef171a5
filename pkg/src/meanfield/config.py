"""Experiment presets and config resolution.

A resolved config is preset defaults, then the config file, then command-line
overrides. Unknown keys and non-positive numbers are rejected.
"""
import copy

from .experiments import ConfigError

COMMON = {"seed": 0, "workers": 1}

PRESETS = {
    "particle-trace": {
        # no reference step exists for this experiment; these values are ours
        "desk": {"d": 2, "m0": 4, "m_grid": [5, 20, 100], "mode": "full", "n": 500,
                 "batch": 100, "step": 0.5, "iterations": 20000, "snapshots": 20, "eval_size": 10000},
        "paper": {"d": 2, "m0": 4, "m_grid": [5, 20, 100, 1000], "mode": "sgd", "n": 500,
                  "batch": 100, "step": 0.1, "iterations": 100000, "snapshots": 50, "eval_size": 10000},
    },
    "teacher-student": {
        "desk": {"d": 10, "m0": 4, "m_grid": [4, 8, 16, 32, 64], "repetitions": 10, "mode": "sgd",
                 "n": 500, "batch": 100, "step": 0.1, "iterations": 10000, "eval_size": 10000},
        "paper": {"d": 100, "m0": 10, "m_grid": [5, 10, 20, 40, 80, 160, 320, 640, 1000],
                  "repetitions": 30, "mode": "sgd", "n": 500, "batch": 100, "step": 0.005,
                  "iterations": 10000, "eval_size": 10000},
    },
    "implicit-bias-2d": {
        "desk": {"d": 2, "k": 3, "m": 1000, "n": 100, "repetitions": 4, "iterations": 10000,
                 "step": 2.0, "output_step_factor": 0.9, "resolution": 128, "eval_size": 10000},
        "paper": {"d": 2, "k": 3, "m": 1000, "n": 100, "repetitions": 4, "iterations": 50000,
                  "step": 2.0, "output_step_factor": 0.9, "resolution": 256, "eval_size": 10000},
    },
    "implicit-bias-highdim": {
        "desk": {"k": 3, "m": 1000, "d_fixed": 15, "n_fixed": 128, "n_grid": [64, 128],
                 "d_grid": [5, 10, 15], "repetitions": 5, "iterations": 3000, "step": 2.0,
                 "output_step_factor": 0.9, "eval_size": 10000},
        "paper": {"k": 3, "m": 1000, "d_fixed": 15, "n_fixed": 256,
                  "n_grid": [16, 32, 64, 128, 256, 512], "d_grid": [2, 5, 10, 15, 20, 25],
                  "repetitions": 20, "iterations": 20000, "step": 2.0,
                  "output_step_factor": 0.9, "eval_size": 10000},
    },
    "certificate": {
        "desk": {"d": 2, "m0": 4, "m_grid": [5, 100], "n": 500, "step": 0.5, "iterations": 20000,
                 "eval_size": 10000, "n_probes": 1000},
        "paper": {"d": 2, "m0": 4, "m_grid": [5, 20, 100, 1000], "n": 1000, "step": 0.5,
                  "iterations": 50000, "eval_size": 10000, "n_probes": 10000},
    },
    "equivalence": {
        "desk": {"d": 2, "m0": 3, "m": 10, "n": 20, "step": 1e-3, "horizon": 1.0, "tau": 0.1,
                 "n_probes": 10},
        "paper": {"d": 2, "m0": 3, "m": 10, "n": 20, "step": 1e-3, "horizon": 1.0, "tau": 0.1,
                  "n_probes": 10},
    },
}

CHOICES = {"mode": ("full", "sgd")}
# zero is allowed for these
NONNEGATIVE = {"seed"}


def resolve(experiment, preset="desk", file_cfg=None, overrides=None):
    if experiment not in PRESETS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    if preset not in ("desk", "paper"):
        raise ConfigError(f"unknown preset {preset!r}")
    cfg = {"experiment": experiment, "preset": preset, **COMMON,
           **copy.deepcopy(PRESETS[experiment][preset])}
    for source in (file_cfg or {}), (overrides or {}):
        for key, value in source.items():
            key = key.replace("-", "_")
            if key in ("experiment", "preset"):
                if value != cfg[key]:
                    raise ConfigError(f"config says {key}={value!r} but {cfg[key]!r} was requested")
                continue
            if key not in cfg:
                raise ConfigError(f"unknown key {key!r} for {experiment}")
            cfg[key] = _coerce(key, value, cfg[key])
    return cfg


def _coerce(key, value, default):
    if key in CHOICES:
        if value not in CHOICES[key]:
            raise ConfigError(f"{key} must be one of {CHOICES[key]}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{key} must be a non-empty list")
        return [_coerce(key, v, default[0]) for v in value]
    try:
        num = int(value) if isinstance(default, int) else float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be numeric, got {value!r}") from None
    if isinstance(default, int) and isinstance(value, float) and not value.is_integer():
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    if num < 0 or (num == 0 and key not in NONNEGATIVE):
        raise ConfigError(f"{key} must be positive, got {value!r}")
    return num
