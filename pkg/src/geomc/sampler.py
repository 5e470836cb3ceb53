"""Geodesic Monte Carlo transition kernels and the chain runner.

The Hamiltonian is ``H(x, v) = -log pi(x) + v^T v / 2`` in ambient coordinates.
One integrator step is a half kick of the velocity along the projected
gradient, an exact geodesic flow, and another projected half kick. On product
manifolds the step size can differ per component; this is leapfrog for a
block-diagonal mass matrix, written in whitened velocity coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

from geomc.errors import BoundaryError, DimensionError, DomainError
from geomc.manifolds import Manifold, PhasePoint, Product, _check_point
from geomc.targets import Target

__all__ = [
    "HmcConfig",
    "Transition",
    "ChainTrace",
    "GeodesicHMC",
    "RwMetropolisSimplex",
    "SphericalRandomWalk",
    "integrator_step",
    "hmc_transition",
    "rwmh_simplex_transition",
    "spherical_rw_transition",
    "great_circle",
    "ChainError",
    "run_chain",
]


@dataclass(frozen=True)
class HmcConfig:
    """Step size (scalar, or one per product component) and number of steps."""

    epsilon: Union[float, tuple] = 0.01
    T: int = 20

    def __post_init__(self):
        eps = self.epsilon
        if np.ndim(eps) == 0:
            eps = float(eps)
            ok = eps > 0
        else:
            eps = tuple(float(e) for e in eps)
            ok = len(eps) > 0 and all(e > 0 for e in eps)
        if not ok:
            raise DomainError("step sizes must be positive")
        if int(self.T) < 1 or int(self.T) != self.T:
            raise DomainError("T must be a positive integer")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "T", int(self.T))


class Transition(NamedTuple):
    x: np.ndarray
    accepted: bool
    delta_H: float
    log_density: float


@dataclass
class ChainTrace:
    """Every state visited by a chain, with per-step acceptance metadata."""

    samples: np.ndarray
    accepted: np.ndarray
    delta_H: np.ndarray
    log_density: np.ndarray
    columns: Sequence[str] | None = None

    def __len__(self):
        return len(self.accepted)

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted)) if len(self) else math.nan

    @classmethod
    def empty(cls, dim: int) -> "ChainTrace":
        return cls(np.empty((0, dim)), np.empty(0, dtype=bool), np.empty(0), np.empty(0))


def _step_sizes(m: Manifold, epsilon):
    """Return (per-coordinate kick sizes, flow durations) for an integrator step."""
    if np.ndim(epsilon) == 0:
        return float(epsilon), float(epsilon)
    eps = np.asarray(epsilon, dtype=float)
    if isinstance(m, Product):
        if eps.shape != (len(m.components),):
            raise DimensionError(f"need {len(m.components)} step sizes, got {eps.size}")
        return m.expand(eps), eps
    if eps.size == 1:
        return float(eps[0]), float(eps[0])
    raise DimensionError("per-component step sizes need a product manifold")


def _leapfrog(m: Manifold, target: Target, x, v, grad, kick, dur, n_steps):
    """``n_steps`` integrator steps, reusing the gradient at the shared endpoints."""
    half = 0.5 * kick
    for _ in range(n_steps):
        v = m.project(x, v + half * grad)
        x, v = m.flow(x, v, dur)
        grad = target.gradient(x)
        v = m.project(x, v + half * grad)
    return x, v, grad


def integrator_step(m: Manifold, target: Target, state: PhasePoint, epsilon) -> PhasePoint:
    """One split-Hamiltonian step: projected half kick, geodesic flow, half kick."""
    x, v = state
    kick, dur = _step_sizes(m, epsilon)
    grad = target.gradient(x)
    x, v, _ = _leapfrog(m, target, x, v, grad, kick, dur, 1)
    return PhasePoint(x, v)


def _hmc(m, target, x0, logp0, cfg: HmcConfig, rng, kick, dur) -> Transition:
    v = m.sample_velocity(x0, rng)
    h0 = logp0 - 0.5 * (v @ v)
    try:
        with np.errstate(all="ignore"):
            x, v, _ = _leapfrog(m, target, x0, v, target.gradient(x0), kick, dur, cfg.T)
            logp = target.log_density(x)
            h1 = logp - 0.5 * (v @ v)
    except (DomainError, BoundaryError):
        # trajectory reached a point of zero density
        h1 = -math.inf
    u = rng.random()
    if not math.isfinite(h1):
        return Transition(x0, False, math.inf, logp0)
    delta = h1 - h0
    if u < math.exp(min(delta, 0.0)):
        return Transition(x, True, -delta, logp)
    return Transition(x0, False, -delta, logp0)


def hmc_transition(m: Manifold, target: Target, x0, cfg: HmcConfig, rng) -> Transition:
    """One geodesic HMC transition from ``x0``.

    Returns ``(x1, accepted, delta_H, log_density(x1))``, where
    ``delta_H = H(end) - H(start)``. A rejected step returns ``x0`` itself.
    A trajectory ending in a non-finite energy is rejected.
    """
    x0 = _check_point(m, x0)
    logp0 = target.log_density(x0)
    if not math.isfinite(logp0):
        raise DomainError("starting point has zero density")
    kick, dur = _step_sizes(m, cfg.epsilon)
    return _hmc(m, target, x0, logp0, cfg, rng, kick, dur)


def _metropolis(x0, logp0, prop, logp1, rng) -> Transition:
    u = rng.random()
    if logp1 == -math.inf:
        return Transition(x0, False, math.inf, logp0)
    delta = logp1 - logp0
    if u < math.exp(min(delta, 0.0)):
        return Transition(prop, True, -delta, logp1)
    return Transition(x0, False, -delta, logp0)


def _rwmh_simplex(target, x0, logp0, epsilon, rng) -> Transition:
    z = rng.standard_normal(x0.size)
    prop = x0 + epsilon * (z - z.mean())
    logp1 = target.log_density(prop) if prop.min() >= 0.0 else -math.inf
    return _metropolis(x0, logp0, prop, logp1, rng)


def rwmh_simplex_transition(target: Target, x0, epsilon: float, rng) -> Transition:
    """Random-walk Metropolis on the simplex with in-plane Gaussian proposals.

    The proposal is ``N(x, eps^2 (I - n n^T))`` with ``n = 1/sqrt(d)``; proposals
    outside the simplex are rejected. ``delta_H`` records ``-log`` of the
    Metropolis ratio.
    """
    x0 = np.asarray(x0, dtype=float)
    return _rwmh_simplex(target, x0, target.log_density(x0), epsilon, rng)


def great_circle(x, delta):
    """Move from ``x`` along the great circle with tangent ``delta`` by arc ``|delta|``."""
    r = math.sqrt(delta @ delta)
    if r == 0.0:
        return x
    return x * math.cos(r) + delta * (math.sin(r) / r)


def _spherical_rw(target, x0, logp0, epsilon, rng) -> Transition:
    z = rng.standard_normal(x0.size)
    prop = great_circle(x0, epsilon * (z - x0 * (x0 @ z)))
    return _metropolis(x0, logp0, prop, target.log_density(prop), rng)


def spherical_rw_transition(target: Target, x0, epsilon: float, rng) -> Transition:
    """Random walk along great circles: ``x cos|d| + d/|d| sin|d|``,
    ``d ~ N(0, eps^2 (I - x x^T))``, accepted with the plain Metropolis ratio."""
    x0 = np.asarray(x0, dtype=float)
    return _spherical_rw(target, x0, target.log_density(x0), epsilon, rng)


@dataclass(frozen=True)
class GeodesicHMC:
    config: HmcConfig = field(default_factory=HmcConfig)

    def transition(self, m, target, x, logp, rng) -> Transition:
        kick, dur = _step_sizes(m, self.config.epsilon)
        return _hmc(m, target, x, logp, self.config, rng, kick, dur)


@dataclass(frozen=True)
class RwMetropolisSimplex:
    epsilon: float = 0.01

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")

    def transition(self, m, target, x, logp, rng) -> Transition:
        return _rwmh_simplex(target, x, logp, self.epsilon, rng)


@dataclass(frozen=True)
class SphericalRandomWalk:
    epsilon: float = 0.01

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")

    def transition(self, m, target, x, logp, rng) -> Transition:
        return _spherical_rw(target, x, logp, self.epsilon, rng)


class ChainError(RuntimeError):
    def __init__(self, step: int, cause: Exception):
        super().__init__(f"step {step}: {cause}")
        self.step = step
        self.cause = cause


def run_chain(kernel, m: Manifold, target: Target, x_init, n_samples: int, rng) -> ChainTrace:
    """Apply ``kernel`` ``n_samples`` times from ``x_init``, recording every state."""
    x = _check_point(m, x_init)
    logp = target.log_density(x)
    if not math.isfinite(logp):
        raise DomainError("initial state has zero density")
    samples = np.empty((n_samples, m.ambient_dim))
    accepted = np.zeros(n_samples, dtype=bool)
    delta_h = np.empty(n_samples)
    log_dens = np.empty(n_samples)
    for i in range(n_samples):
        try:
            step = kernel.transition(m, target, x, logp, rng)
        except Exception as exc:
            raise ChainError(i, exc) from exc
        x, logp = step.x, step.log_density
        samples[i] = x
        accepted[i] = step.accepted
        delta_h[i] = step.delta_H
        log_dens[i] = logp
    return ChainTrace(samples, accepted, delta_h, log_dens)
