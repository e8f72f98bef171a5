"""``mf <experiment> --config FILE [--seed N] [--out DIR] [--preset desk|paper]``.

Exit codes: 0 success, 2 bad config, 3 numerical divergence outside sweeps.
"""
import argparse
import json
import logging
import sys

from . import experiments
from .config import PRESETS, resolve
from .experiments import ConfigError
from .io import load_config_file

SWEEPS = {"teacher-student", "implicit-bias-highdim"}


def build_parser():
    ap = argparse.ArgumentParser(prog="mf", description="Mean-field two-layer network experiments")
    ap.add_argument("experiment", choices=sorted(PRESETS))
    ap.add_argument("--config", help="YAML file of key: value overrides")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", default="results")
    ap.add_argument("--preset", default="desk", choices=("desk", "paper"))
    ap.add_argument("--workers", type=int)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    overrides = {k: v for k, v in (("seed", args.seed), ("workers", args.workers)) if v is not None}
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        cfg = resolve(args.experiment, args.preset, file_cfg, overrides)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"mf: config error: {exc}", file=sys.stderr)
        return 2
    try:
        result = experiments.run(args.experiment, cfg, args.out)
    except ConfigError as exc:
        print(f"mf: config error: {exc}", file=sys.stderr)
        return 2
    except FloatingPointError as exc:
        if args.experiment in SWEEPS:
            raise
        print(f"mf: divergence: {exc}", file=sys.stderr)
        return 3
    if result.get("diverged") and args.experiment not in SWEEPS:
        print(f"mf: divergence: {result.get('message', 'run diverged')}", file=sys.stderr)
        return 3
    summary = {k: v for k, v in result.items() if k != "diverged"}
    print(json.dumps(summary, default=str, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
