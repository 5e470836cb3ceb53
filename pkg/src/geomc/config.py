"""Experiment configuration: JSON schema, validation and named presets.

A config is a JSON object with these keys (``preset`` optional; any key not
given falls back to the preset, or to the experiment's default preset)::

    {
      "preset": "figure4",
      "experiment": "bvmf" | "volleyball" | "eigenmodel" | "dirichlet-bench",
      "kernel": {"kind": "geodesic-hmc", "epsilon": [0.01], "T": 20},
      "ladder": null | [0.1, ..., 1.0],
      "n_exchanges": 10,
      "n_samples": 200,
      "burn_in": null,            # null -> 10% of n_samples
      "seed": 0,
      "dataset": null,            # match file or edge file
      "output": "out/figure4",    # directory for traces and summary.json
      "params": {...}             # experiment specific, see PARAM_KEYS
    }

Kernel kinds: ``geodesic-hmc`` (bvmf, eigenmodel) and, for the simplex
models, ``spherical-hmc``, ``simplex-hmc``, ``rw-mh``, ``spherical-rw``.
"""

from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field
from typing import Any, Optional

import numpy as np

from geomc.errors import ConfigError

__all__ = ["ExperimentConfig", "KernelSpec", "PRESETS", "load_config", "from_dict", "preset", "apply_override"]

EXPERIMENTS = ("bvmf", "volleyball", "eigenmodel", "dirichlet-bench")
SIMPLEX_KERNELS = ("spherical-hmc", "simplex-hmc", "rw-mh", "spherical-rw")
KERNELS = {
    "bvmf": ("geodesic-hmc",),
    "eigenmodel": ("geodesic-hmc",),
    "volleyball": SIMPLEX_KERNELS,
    "dirichlet-bench": SIMPLEX_KERNELS,
}
PARAM_KEYS = {
    "bvmf": {"A_diag": list, "c1": list},
    "volleyball": {"alpha": float},
    "dirichlet-bench": {"alphas": list, "samplers": list, "write_traces": bool},
    "eigenmodel": {"m": int, "p": int, "network_seed": int},
}
TOP_KEYS = {"preset", "experiment", "kernel", "ladder", "n_exchanges", "n_samples", "burn_in", "seed",
            "dataset", "output", "params"}


@dataclass
class KernelSpec:
    kind: str
    epsilon: list
    T: int = 20


@dataclass
class ExperimentConfig:
    experiment: str
    kernel: KernelSpec
    n_samples: int
    seed: int
    output: str
    params: dict = field(default_factory=dict)
    ladder: Optional[list] = None
    n_exchanges: int = 10
    burn_in: Optional[int] = None
    dataset: Optional[str] = None
    preset: Optional[str] = None

    @property
    def resolved_burn_in(self) -> int:
        return self.n_samples // 10 if self.burn_in is None else self.burn_in

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


_FIG_BASE = {
    "experiment": "bvmf",
    "kernel": {"kind": "geodesic-hmc", "epsilon": [0.01], "T": 20},
    "n_samples": 200,
    "seed": 0,
    "params": {"A_diag": [-20.0, -10.0, 0.0, 10.0, 20.0], "c1": [0.0, 40.0, 80.0]},
}

PRESETS: dict[str, dict] = {
    "figure4": {**_FIG_BASE, "output": "out/figure4"},
    "figure5": {
        **_FIG_BASE,
        "ladder": [round(0.1 * k, 1) for k in range(1, 11)],
        "n_exchanges": 10,
        "output": "out/figure5",
    },
    "volleyball": {
        "experiment": "volleyball",
        "kernel": {"kind": "spherical-hmc", "epsilon": [0.01], "T": 20},
        "n_samples": 10000,
        "seed": 0,
        "params": {"alpha": 0.5},
        "output": "out/volleyball",
    },
    "table1": {
        "experiment": "dirichlet-bench",
        "kernel": {"kind": "spherical-hmc", "epsilon": [0.01], "T": 20},
        "n_samples": 100000,
        "seed": 0,
        "params": {"alphas": [0.1, 0.5, 1.0, 5.0], "samplers": list(SIMPLEX_KERNELS), "write_traces": False},
        "output": "out/table1",
    },
    "eigenmodel": {
        "experiment": "eigenmodel",
        "kernel": {"kind": "geodesic-hmc", "epsilon": [0.005, 0.1, 0.001], "T": 20},
        "n_samples": 1000,
        "seed": 0,
        "params": {"m": 20, "p": 3, "network_seed": 0},
        "output": "out/eigenmodel",
    },
    "eigenmodel-pt": {
        "experiment": "eigenmodel",
        "kernel": {"kind": "geodesic-hmc", "epsilon": [0.005, 0.1, 0.001], "T": 20},
        "n_samples": 200,
        "seed": 0,
        "ladder": [float(r) for r in np.geomspace(0.05, 1.0, 20)[:-1]] + [1.0],
        "n_exchanges": 10,
        "params": {"m": 20, "p": 3, "network_seed": 0},
        "output": "out/eigenmodel-pt",
    },
}
DEFAULT_PRESET = {"bvmf": "figure4", "volleyball": "volleyball", "dirichlet-bench": "table1",
                  "eigenmodel": "eigenmodel"}


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _num(v, key, kind=float):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def from_dict(raw: dict) -> ExperimentConfig:
    """Validate a raw config mapping, filling gaps from presets."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown key: {sorted(unknown)[0]}")
    name = raw.get("preset")
    if name is not None:
        if name not in PRESETS:
            raise ConfigError(f"preset: unknown preset {name!r}")
        base = PRESETS[name]
    else:
        exp = raw.get("experiment")
        if exp is None:
            raise ConfigError("experiment: missing required key")
        if exp not in EXPERIMENTS:
            raise ConfigError(f"experiment: unknown experiment {exp!r}")
        base = PRESETS[DEFAULT_PRESET[exp]]
        if base["experiment"] == exp:
            base = {k: v for k, v in base.items() if k != "output"}
    merged = _merge(base, {k: v for k, v in raw.items() if k != "preset"})
    if name is None and merged.get("experiment") != base.get("experiment"):
        merged["params"] = raw.get("params", {})

    exp = merged.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigError(f"experiment: unknown experiment {exp!r}")
    for key in ("kernel", "n_samples", "seed", "output"):
        if key not in merged:
            raise ConfigError(f"{key}: missing required key")

    k = merged["kernel"]
    if not isinstance(k, dict):
        raise ConfigError("kernel: expected an object")
    bad = set(k) - {"kind", "epsilon", "T"}
    if bad:
        raise ConfigError(f"kernel.{sorted(bad)[0]}: unknown key")
    if k.get("kind") not in KERNELS[exp]:
        raise ConfigError(f"kernel.kind: {k.get('kind')!r} not valid for {exp} (choose from {KERNELS[exp]})")
    eps = k.get("epsilon")
    eps = [eps] if not isinstance(eps, list) else eps
    eps = [_num(e, "kernel.epsilon") for e in eps]
    if not eps or any(e <= 0 for e in eps):
        raise ConfigError("kernel.epsilon: step sizes must be positive")
    n_eps = 3 if exp == "eigenmodel" else 1
    if len(eps) not in (1, n_eps):
        raise ConfigError(f"kernel.epsilon: expected 1 or {n_eps} values")
    T = _num(k.get("T", 20), "kernel.T", int)
    if T < 1:
        raise ConfigError("kernel.T: must be >= 1")
    kernel = KernelSpec(k["kind"], eps, T)

    n_samples = _num(merged["n_samples"], "n_samples", int)
    if n_samples < 1:
        raise ConfigError("n_samples: must be >= 1")
    burn_in = merged.get("burn_in")
    if burn_in is not None:
        burn_in = _num(burn_in, "burn_in", int)
        if not 0 <= burn_in < n_samples:
            raise ConfigError("burn_in: must lie in [0, n_samples)")
    else:
        burn_in = n_samples // 10
    seed = _num(merged["seed"], "seed", int)
    ladder = merged.get("ladder")
    if ladder is not None:
        if not isinstance(ladder, list) or not ladder:
            raise ConfigError("ladder: expected a non-empty list")
        ladder = [_num(r, "ladder") for r in ladder]
        if ladder[-1] != 1.0 or ladder[0] <= 0 or any(b <= a for a, b in zip(ladder, ladder[1:])):
            raise ConfigError("ladder: must be strictly ascending in (0, 1] and end at 1")
        if exp not in ("bvmf", "eigenmodel"):
            raise ConfigError(f"ladder: tempering is not supported for {exp}")
    n_exchanges = _num(merged.get("n_exchanges", 10), "n_exchanges", int)
    if n_exchanges < 0:
        raise ConfigError("n_exchanges: must be >= 0")
    dataset = merged.get("dataset")
    if dataset is not None and not isinstance(dataset, str):
        raise ConfigError("dataset: expected a path string")
    if not isinstance(merged["output"], str) or not merged["output"]:
        raise ConfigError("output: expected a path string")

    params = merged.get("params") or {}
    if not isinstance(params, dict):
        raise ConfigError("params: expected an object")
    allowed = PARAM_KEYS[exp]
    for key, val in params.items():
        if key not in allowed:
            raise ConfigError(f"params.{key}: unknown key for {exp}")
        typ = allowed[key]
        if typ is list and not isinstance(val, list):
            raise ConfigError(f"params.{key}: expected a list")
        if typ is bool and not isinstance(val, bool):
            raise ConfigError(f"params.{key}: expected true/false")
        if typ in (int, float):
            params[key] = _num(val, f"params.{key}", typ)
    _check_params(exp, params, kernel)

    return ExperimentConfig(
        experiment=exp, kernel=kernel, n_samples=n_samples, seed=seed, output=merged["output"],
        params=params, ladder=ladder, n_exchanges=n_exchanges, burn_in=burn_in, dataset=dataset,
        preset=name,
    )


def _check_params(exp, params, kernel):
    if exp == "bvmf":
        for key in ("A_diag", "c1"):
            if key not in params:
                raise ConfigError(f"params.{key}: missing required key")
        params["A_diag"] = [_num(a, "params.A_diag") for a in params["A_diag"]]
        params["c1"] = [_num(a, "params.c1") for a in params["c1"]]
        if len(params["A_diag"]) < 2 or not params["c1"]:
            raise ConfigError("params.A_diag: need at least 2 entries; params.c1: need at least one value")
    elif exp == "volleyball":
        if "alpha" not in params:
            raise ConfigError("params.alpha: missing required key")
        if params["alpha"] <= 0:
            raise ConfigError("params.alpha: must be positive")
    elif exp == "dirichlet-bench":
        for key in ("alphas", "samplers"):
            if key not in params:
                raise ConfigError(f"params.{key}: missing required key")
        params["alphas"] = [_num(a, "params.alphas") for a in params["alphas"]]
        if not params["alphas"] or any(a <= 0 for a in params["alphas"]):
            raise ConfigError("params.alphas: need positive values")
        for s in params["samplers"]:
            if s not in SIMPLEX_KERNELS:
                raise ConfigError(f"params.samplers: unknown sampler {s!r}")
        params.setdefault("write_traces", False)
    elif exp == "eigenmodel":
        if "p" not in params:
            raise ConfigError("params.p: missing required key")
        params.setdefault("m", 20)
        params.setdefault("network_seed", 0)
        if params["p"] < 1 or params["m"] < params["p"]:
            raise ConfigError("params.p: need 1 <= p <= m")


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    if not text.strip():
        raise ConfigError(f"{path}: empty config file")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(raw)


def preset(name: str, overrides: dict | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"preset: unknown preset {name!r}")
    raw = {"preset": name}
    for key, value in (overrides or {}).items():
        apply_override(raw, key, value)
    return from_dict(raw)


def apply_override(raw: dict, dotted: str, value: Any) -> dict:
    """Set ``raw[a][b]... = value`` for a dotted key ``a.b...``."""
    parts = dotted.split(".")
    node = raw
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise ConfigError(f"{dotted}: cannot descend into a non-object")
    node[parts[-1]] = value
    return raw
