"""Build and run the experiments described by an :class:`ExperimentConfig`.

Every run writes one trace CSV per chain plus ``summary.json`` into
``cfg.output``. The summary echoes the resolved config and holds, per chain,
an ESS report over all samples and one after burn-in, and the wall time.
"""

from __future__ import annotations

import json
import math
import time
from pathlib import Path

import numpy as np
from scipy.special import ndtri

from geomc.config import ExperimentConfig
from geomc.datasets import (
    coordinate_names,
    load_edges,
    load_matches,
    planted_network,
    save_edges,
    volleyball_fixture,
    write_trace,
)
from geomc.diagnostics import summarize
from geomc.errors import ConfigError
from geomc.numeric import make_rng
from geomc.sampler import GeodesicHMC, HmcConfig, RwMetropolisSimplex, SphericalRandomWalk, run_chain
from geomc.targets import BinghamVonMisesFisher, Eigenmodel, EigenmodelState, Volleyball
from geomc.tempering import TemperatureLadder, run_parallel_tempering

__all__ = ["run_experiment", "simplex_kernel", "eigenmodel_start", "square"]


def square(samples):
    """Map sphere samples to the simplex, ``theta = x**2``."""
    return np.asarray(samples) ** 2


def _eps(cfg: ExperimentConfig):
    e = cfg.kernel.epsilon
    return e[0] if len(e) == 1 else tuple(e)


def simplex_kernel(kind: str, matches, alpha: float, epsilon: float, T: int, d: int | None = None):
    """Return ``(kernel, target, x_init, transform)`` for one of the four simplex samplers."""
    on = "sphere" if kind in ("spherical-hmc", "spherical-rw") else "simplex"
    target = Volleyball(matches, alpha, d, on=on)
    d = target.manifold.ambient_dim
    if kind in ("spherical-hmc", "simplex-hmc"):
        kernel = GeodesicHMC(HmcConfig(epsilon, T))
    elif kind == "rw-mh":
        kernel = RwMetropolisSimplex(epsilon)
    elif kind == "spherical-rw":
        kernel = SphericalRandomWalk(epsilon)
    else:
        raise ConfigError(f"kernel.kind: unknown sampler {kind!r}")
    if on == "sphere":
        return kernel, target, np.full(d, 1.0 / math.sqrt(d)), square
    return kernel, target, np.full(d, 1.0 / d), None


def eigenmodel_start(data, p: int) -> np.ndarray:
    """U = first p identity columns, Lambda = 0, c = probit of the observed edge fraction."""
    y = data.ystar[np.triu_indices(data.m, 1)]
    obs = y[y != 0]
    frac = float(np.mean(obs > 0)) if obs.size else 0.5
    frac = min(max(frac, 1e-3), 1 - 1e-3)
    return EigenmodelState(np.eye(data.m)[:, :p], np.zeros(p), float(ndtri(frac))).pack()


def _record(out: Path, label: str, trace, wall, cfg, transform=None, write=True) -> dict:
    entry = {"label": label, "wall_seconds": wall}
    if write:
        name = f"trace_{label}.csv"
        write_trace(trace, out / name)
        entry["trace"] = name
    entry["acceptance_rate"] = trace.acceptance_rate
    entry["best_log_density"] = float(np.max(trace.log_density))
    entry["ess"] = summarize(trace, wall, transform).to_dict()
    burn = min(cfg.resolved_burn_in, len(trace) - 10)
    entry["ess_post_burn_in"] = summarize(trace, wall, transform, burn_in=max(burn, 0)).to_dict()
    return entry


def _label(v: float) -> str:
    return f"{v:g}".replace("-", "m")


def _run_bvmf(cfg: ExperimentConfig, out: Path, rng):
    a = np.asarray(cfg.params["A_diag"])
    d = a.size
    runs = []
    streams = rng.spawn(len(cfg.params["c1"]))
    for c1, stream in zip(cfg.params["c1"], streams):
        c = np.zeros(d)
        c[0] = c1
        target = BinghamVonMisesFisher(c, np.diag(a))
        x0 = np.full(d, 1.0 / math.sqrt(d))
        kernel = GeodesicHMC(HmcConfig(_eps(cfg), cfg.kernel.T))
        t0 = time.perf_counter()
        extra = {}
        if cfg.ladder:
            ladder = TemperatureLadder(tuple(cfg.ladder))
            trace, ens = run_parallel_tempering(kernel, target, x0, ladder, cfg.n_samples, cfg.n_exchanges, stream)
            extra["swap_rate"] = (ens.swap_accepts / np.maximum(ens.swap_attempts, 1)).tolist()
        else:
            trace = run_chain(kernel, target.manifold, target, x0, cfg.n_samples, stream)
        wall = time.perf_counter() - t0
        trace.columns = coordinate_names("plain", d)
        entry = _record(out, f"c1_{_label(c1)}", trace, wall, cfg)
        entry["c1"] = c1
        entry.update(extra)
        runs.append(entry)
    return {"runs": runs}


def _matches(cfg):
    path = cfg.dataset or volleyball_fixture()
    return load_matches(path), str(path)


def _run_volleyball(cfg: ExperimentConfig, out: Path, rng):
    matches, path = _matches(cfg)
    kernel, target, x0, tf = simplex_kernel(cfg.kernel.kind, matches, cfg.params["alpha"], _eps(cfg), cfg.kernel.T)
    t0 = time.perf_counter()
    trace = run_chain(kernel, target.manifold, target, x0, cfg.n_samples, rng)
    wall = time.perf_counter() - t0
    trace.columns = coordinate_names("plain", x0.size)
    entry = _record(out, cfg.kernel.kind, trace, wall, cfg, tf)
    burn = cfg.resolved_burn_in
    theta = trace.samples[burn:] if tf is None else tf(trace.samples[burn:])
    entry["posterior_mean_theta"] = theta.mean(axis=0).tolist()
    return {"dataset": path, "runs": [entry]}


def _run_bench(cfg: ExperimentConfig, out: Path, rng):
    matches, path = _matches(cfg)
    samplers = cfg.params["samplers"]
    alphas = cfg.params["alphas"]
    streams = rng.spawn(len(samplers) * len(alphas))
    grid, runs = {}, []
    for i, kind in enumerate(samplers):
        grid[kind] = {}
        for j, alpha in enumerate(alphas):
            kernel, target, x0, tf = simplex_kernel(kind, matches, alpha, _eps(cfg), cfg.kernel.T)
            t0 = time.perf_counter()
            trace = run_chain(kernel, target.manifold, target, x0, cfg.n_samples, streams[i * len(alphas) + j])
            wall = time.perf_counter() - t0
            trace.columns = coordinate_names("plain", x0.size)
            entry = _record(out, f"{kind}_alpha{_label(alpha)}", trace, wall, cfg, tf,
                            write=cfg.params["write_traces"])
            entry.update(sampler=kind, alpha=alpha)
            runs.append(entry)
            rep = entry["ess_post_burn_in"]
            grid[kind][f"{alpha:g}"] = {"ess_percent": rep["ess_percent"], "ess_per_second": rep["ess_per_second"]}
    return {"dataset": path, "grid": grid, "runs": runs}


def _run_eigenmodel(cfg: ExperimentConfig, out: Path, rng):
    p = cfg.params["p"]
    info = {}
    if cfg.dataset:
        data = load_edges(cfg.dataset)
        info["dataset"] = cfg.dataset
    else:
        net_rng = make_rng(cfg.params["network_seed"])
        data, truth = planted_network(cfg.params["m"], p, net_rng)
        save_edges(data, out / "network.txt", header=f"planted network, m={data.m}, p={p}")
        info["dataset"] = "network.txt"
        info["truth"] = {"U": truth.U.tolist(), "Lambda": truth.Lambda.tolist(), "c": truth.c}
    target = Eigenmodel(data, p)
    x0 = eigenmodel_start(data, p)
    kernel = GeodesicHMC(HmcConfig(_eps(cfg), cfg.kernel.T))
    t0 = time.perf_counter()
    extra = {}
    if cfg.ladder:
        ladder = TemperatureLadder(tuple(cfg.ladder))
        trace, ens = run_parallel_tempering(kernel, target, x0, ladder, cfg.n_samples, cfg.n_exchanges, rng)
        extra["swap_rate"] = (ens.swap_accepts / np.maximum(ens.swap_attempts, 1)).tolist()
    else:
        trace = run_chain(kernel, target.manifold, target, x0, cfg.n_samples, rng)
    wall = time.perf_counter() - t0
    trace.columns = coordinate_names("eigenmodel", x0.size, data.m, p)
    entry = _record(out, "eigenmodel" if not cfg.ladder else "eigenmodel_pt", trace, wall, cfg)
    entry.update(extra)
    return {**info, "runs": [entry]}


RUNNERS = {
    "bvmf": _run_bvmf,
    "volleyball": _run_volleyball,
    "dirichlet-bench": _run_bench,
    "eigenmodel": _run_eigenmodel,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run ``cfg`` and write traces and ``summary.json``; return the summary.

    Raises whatever module error stops the run; the CLI turns those into exit
    codes.
    """
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    rng = make_rng(cfg.seed)
    t0 = time.perf_counter()
    result = RUNNERS[cfg.experiment](cfg, out, rng)
    summary = {"config": cfg.to_dict(), **result, "wall_seconds": time.perf_counter() - t0}
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, default=_jsonable)
    return summary


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not JSON serialisable: {type(v).__name__}")
