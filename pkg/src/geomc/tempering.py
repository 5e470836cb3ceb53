"""Tempered targets and a parallel tempering driver."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from geomc.errors import DomainError
from geomc.manifolds import Manifold, _check_point
from geomc.numeric import split_rng
from geomc.sampler import ChainError, ChainTrace
from geomc.targets import Target

__all__ = ["Tempered", "tempered", "TemperatureLadder", "EnsembleState", "pt_sweep", "run_parallel_tempering"]


class Tempered(Target):
    """``pi(x)^rho``: log-density and gradient scaled by ``rho``."""

    def __init__(self, base: Target, rho: float):
        rho = float(rho)
        if not 0.0 < rho <= 1.0:
            raise DomainError(f"inverse temperature must lie in (0, 1], got {rho}")
        self.base = base
        self.rho = rho
        self.manifold = base.manifold

    def log_density(self, x):
        return self.rho * self.base.log_density(x)

    def gradient(self, x):
        return self.rho * self.base.gradient(x)


def tempered(target: Target, rho: float) -> Tempered:
    return Tempered(target, rho)


@dataclass(frozen=True)
class TemperatureLadder:
    """Strictly ascending inverse temperatures ending at exactly 1."""

    rhos: tuple

    def __post_init__(self):
        rhos = tuple(float(r) for r in self.rhos)
        if not rhos or rhos[-1] != 1.0:
            raise DomainError("ladder must end at rho = 1")
        if rhos[0] <= 0.0 or any(b <= a for a, b in zip(rhos, rhos[1:])):
            raise DomainError("ladder must be strictly ascending in (0, 1]")
        object.__setattr__(self, "rhos", rhos)

    def __len__(self):
        return len(self.rhos)

    @classmethod
    def linear(cls, lo: float, n: int) -> "TemperatureLadder":
        return cls(tuple(np.round(np.linspace(lo, 1.0, n), 12)))

    @classmethod
    def geometric(cls, lo: float, n: int) -> "TemperatureLadder":
        rhos = np.geomspace(lo, 1.0, n)
        rhos[-1] = 1.0
        return cls(tuple(rhos))


@dataclass
class EnsembleState:
    """One state per rung (coldest last), plus per-rung streams and statistics.

    ``log_density`` holds the *untempered* log-density of each rung's state.
    """

    points: list
    log_density: list
    rngs: list
    exchange_rng: np.random.Generator
    swap_attempts: np.ndarray
    swap_accepts: np.ndarray
    kernel_accepts: np.ndarray = field(default=None)
    n_sweeps: int = 0

    @classmethod
    def start(cls, target: Target, x_init, ladder: TemperatureLadder, rng) -> "EnsembleState":
        n = len(ladder)
        x_init = _check_point(target.manifold, x_init)
        lp = target.log_density(x_init)
        if not math.isfinite(lp):
            raise DomainError("initial state has zero density")
        streams = split_rng(rng, n + 1)
        return cls(
            points=[x_init.copy() for _ in range(n)],
            log_density=[lp] * n,
            rngs=streams[:n],
            exchange_rng=streams[n],
            swap_attempts=np.zeros(n - 1, dtype=int),
            swap_accepts=np.zeros(n - 1, dtype=int),
            kernel_accepts=np.zeros(n, dtype=int),
        )


def swap_log_ratio(rho_lo: float, rho_hi: float, logp_lo: float, logp_hi: float) -> float:
    """Log acceptance ratio for exchanging the states of rungs ``rho_lo < rho_hi``."""
    return (rho_lo - rho_hi) * (logp_hi - logp_lo)


def pt_sweep(ens: EnsembleState, ladder: TemperatureLadder, kernels, target: Target, n_exchanges: int):
    """Advance every rung by one kernel transition, then attempt exchanges.

    Exchanges pick a uniformly random adjacent pair each time and swap with
    probability ``min(1, exp[(rho_k - rho_k+1)(log pi(x_k+1) - log pi(x_k))])``.
    Returns the cold-rung :class:`~geomc.sampler.Transition` from the kernel
    phase (its ``x`` may since have been exchanged; read ``ens.points[-1]``).
    """
    m: Manifold = target.manifold
    n = len(ladder)
    if not isinstance(kernels, (list, tuple)):
        kernels = [kernels] * n
    cold = None
    for k, rho in enumerate(ladder.rhos):
        tgt = target if rho == 1.0 else Tempered(target, rho)
        try:
            step = kernels[k].transition(m, tgt, ens.points[k], rho * ens.log_density[k], ens.rngs[k])
        except Exception as exc:
            raise ChainError(ens.n_sweeps, RuntimeError(f"rung {k}: {exc}")) from exc
        ens.points[k] = step.x
        if step.accepted:
            ens.log_density[k] = step.log_density / rho if rho != 1.0 else step.log_density
        ens.kernel_accepts[k] += step.accepted
        if k == n - 1:
            cold = step
    if n > 1:
        rng = ens.exchange_rng
        for _ in range(n_exchanges):
            k = int(rng.integers(n - 1))
            u = rng.random()
            ens.swap_attempts[k] += 1
            r = swap_log_ratio(ladder.rhos[k], ladder.rhos[k + 1], ens.log_density[k], ens.log_density[k + 1])
            if u < math.exp(min(r, 0.0)):
                ens.points[k], ens.points[k + 1] = ens.points[k + 1], ens.points[k]
                ens.log_density[k], ens.log_density[k + 1] = ens.log_density[k + 1], ens.log_density[k]
                ens.swap_accepts[k] += 1
    ens.n_sweeps += 1
    return cold


def run_parallel_tempering(kernel, target: Target, x_init, ladder: TemperatureLadder, n_sweeps: int,
                           n_exchanges: int, rng):
    """Run ``n_sweeps`` sweeps; return ``(cold-chain trace, final ensemble)``.

    The cold trace records the rho = 1 state after each sweep's exchanges.
    ``accepted``/``delta_H`` refer to the cold rung's kernel transition.
    """
    ens = EnsembleState.start(target, x_init, ladder, rng)
    dim = target.manifold.ambient_dim
    samples = np.empty((n_sweeps, dim))
    accepted = np.zeros(n_sweeps, dtype=bool)
    delta_h = np.empty(n_sweeps)
    log_dens = np.empty(n_sweeps)
    for i in range(n_sweeps):
        step = pt_sweep(ens, ladder, kernel, target, n_exchanges)
        samples[i] = ens.points[-1]
        accepted[i] = step.accepted
        delta_h[i] = step.delta_H
        log_dens[i] = ens.log_density[-1]
    return ChainTrace(samples, accepted, delta_h, log_dens), ens
