"""Shared helpers for the experiment scripts."""

import argparse

from geomc.config import preset
from geomc.experiments import run_experiment


def parser(name, description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=None, help="output directory (default: the preset's)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n-samples", type=int, default=None)
    p.set_defaults(preset_name=name)
    return p


def run(args, **extra):
    over = dict(extra)
    if args.out:
        over["output"] = args.out
    if args.seed is not None:
        over["seed"] = args.seed
    if args.n_samples is not None:
        over["n_samples"] = args.n_samples
    cfg = preset(args.preset_name, over)
    return cfg, run_experiment(cfg)
