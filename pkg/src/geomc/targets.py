"""Unnormalised log-densities (w.r.t. Hausdorff measure) and their gradients.

A target exposes ``manifold``, ``log_density(x)`` and ``gradient(x)``, where
``x`` is a flat ambient point and the gradient is the ambient (unprojected)
gradient. ``log_density`` may return ``-inf`` at points of zero density;
asking for the gradient at such a point raises :class:`DomainError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from geomc.errors import DimensionError, DomainError
from geomc.manifolds import Euclidean, Manifold, Product, ReflectiveSimplex, Sphere, Stiefel
from geomc.numeric import log_probit, probit_ratio

__all__ = [
    "Target",
    "VonMisesFisher",
    "BinghamVonMisesFisher",
    "DirichletSphere",
    "DirichletSimplex",
    "MatchRecord",
    "Volleyball",
    "EigenmodelData",
    "EigenmodelState",
    "Eigenmodel",
    "eigenmodel_log_posterior",
    "eigenmodel_gradients",
]


class Target:
    manifold: Manifold

    def log_density(self, x) -> float:
        raise NotImplementedError

    def gradient(self, x) -> np.ndarray:
        raise NotImplementedError


def _check_dim(x, d):
    if x.shape != (d,):
        raise DimensionError(f"expected a point of length {d}, got shape {x.shape}")


class VonMisesFisher(Target):
    """Density ``exp(c^T x)`` on the sphere, ``c = kappa * mu``."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        if not np.all(np.isfinite(self.c)):
            raise DomainError("vMF parameter must be finite")
        self.manifold = Sphere(self.c.size)

    def log_density(self, x):
        return float(self.c @ x)

    def gradient(self, x):
        return self.c


class BinghamVonMisesFisher(Target):
    """Density ``exp(c^T x + x^T A x)`` on the sphere."""

    def __init__(self, c, A):
        c = np.asarray(c, dtype=float)
        A = np.asarray(A, dtype=float)
        if A.shape != (c.size, c.size):
            raise DimensionError(f"A must be {c.size}x{c.size}, got {A.shape}")
        if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
            raise DomainError("A must be symmetric")
        self.c = c
        self.A = 0.5 * (A + A.T)
        self.manifold = Sphere(c.size)

    def log_density(self, x):
        return float(self.c @ x + x @ self.A @ x)

    def gradient(self, x):
        return self.c + 2.0 * (self.A @ x)


def _log_power_sum(x, expo):
    """``sum(expo * log|x|)`` with ``0 * log 0 = 0`` and ``-inf`` at other zeros."""
    ax = np.abs(x)
    zero = ax == 0.0
    if zero.any():
        if np.any(expo[zero] != 0.0):
            return -math.inf
        return float(expo[~zero] @ np.log(ax[~zero]))
    return float(expo @ np.log(ax))


class DirichletSphere(Target):
    """Dirichlet(alpha) carried to the sphere by ``x_i = sqrt(theta_i)``.

    The density ``prod |x_i|^(2 alpha_i - 1)`` is extended to all orthants by
    reflection, so it is a smooth density on the whole sphere when every
    ``alpha_i >= 1/2``.
    """

    def __init__(self, alpha):
        self.alpha = np.asarray(alpha, dtype=float)
        if np.any(self.alpha <= 0.0):
            raise DomainError("Dirichlet parameters must be positive")
        self._expo = 2.0 * self.alpha - 1.0
        self.manifold = Sphere(self.alpha.size)

    def log_density(self, x):
        return _log_power_sum(x, self._expo)

    def gradient(self, x):
        if np.any(x == 0.0):
            raise DomainError("Dirichlet gradient undefined on a coordinate hyperplane")
        return self._expo / x


class DirichletSimplex(Target):
    """Dirichlet(alpha) with respect to Lebesgue measure on the simplex."""

    def __init__(self, alpha):
        self.alpha = np.asarray(alpha, dtype=float)
        if np.any(self.alpha <= 0.0):
            raise DomainError("Dirichlet parameters must be positive")
        self._expo = self.alpha - 1.0
        self.manifold = ReflectiveSimplex(self.alpha.size)

    def log_density(self, theta):
        if np.any(theta < 0.0):
            return -math.inf
        return _log_power_sum(theta, self._expo)

    def gradient(self, theta):
        if np.any(theta <= 0.0):
            raise DomainError("Dirichlet gradient undefined on the simplex boundary")
        return self._expo / theta


@dataclass(frozen=True)
class MatchRecord:
    """One match: the winning and losing teams as 1-based player indices."""

    winners: frozenset
    losers: frozenset

    def __post_init__(self):
        w, l = frozenset(self.winners), frozenset(self.losers)
        object.__setattr__(self, "winners", w)
        object.__setattr__(self, "losers", l)
        if not w or not l:
            raise DomainError("both teams must be non-empty")
        if w & l:
            raise DomainError(f"teams overlap: {sorted(w & l)}")
        if min(w | l) < 1:
            raise DomainError("player indices are 1-based")


class Volleyball(Target):
    """Team-strength posterior under a symmetric Dirichlet(alpha) prior.

    A team ``W`` beats ``L`` with probability ``sum_W p / sum_{W u L} p``.
    With ``on="sphere"`` the state is ``x`` with ``p = x**2`` and the prior is
    :class:`DirichletSphere`; with ``on="simplex"`` the state is ``p`` itself.
    """

    def __init__(self, matches: Sequence[MatchRecord], alpha, d: int | None = None, on: str = "sphere"):
        matches = list(matches)
        if d is None:
            d = max(max(m.winners | m.losers) for m in matches) if matches else 1
        alpha = np.broadcast_to(np.asarray(alpha, dtype=float), (d,)).copy()
        self.d = d
        self.matches = matches
        self.on = on
        if on == "sphere":
            self.prior = DirichletSphere(alpha)
        elif on == "simplex":
            self.prior = DirichletSimplex(alpha)
        else:
            raise ValueError(f"unknown space {on!r}")
        self.manifold = self.prior.manifold
        # incidence matrices: row per match
        self._win = np.zeros((len(matches), d))
        self._all = np.zeros((len(matches), d))
        for k, m in enumerate(matches):
            if max(m.winners | m.losers) > d:
                raise DimensionError(f"match {k} refers to a player beyond {d}")
            self._win[k, [i - 1 for i in m.winners]] = 1.0
            self._all[k, [i - 1 for i in m.winners | m.losers]] = 1.0

    def _weights(self, x):
        return x * x if self.on == "sphere" else x

    def log_density(self, x):
        lp = self.prior.log_density(x)
        if not self.matches or lp == -math.inf:
            return lp
        w = self._weights(x)
        sw = self._win @ w
        su = self._all @ w
        if np.any(su <= 0.0) or np.any(sw <= 0.0):
            return -math.inf
        return lp + float(np.log(sw).sum() - np.log(su).sum())

    def gradient(self, x):
        g = self.prior.gradient(x)
        if not self.matches:
            return g
        w = self._weights(x)
        coef = self._win.T @ (1.0 / (self._win @ w)) - self._all.T @ (1.0 / (self._all @ w))
        if self.on == "sphere":
            return g + 2.0 * x * coef
        return g + coef


@dataclass
class EigenmodelData:
    """Signed adjacency ``Y*``: +1 edge, -1 observed non-edge, 0 unobserved."""

    ystar: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.ystar)
        if y.ndim != 2 or y.shape[0] != y.shape[1]:
            raise DimensionError("Y* must be square")
        if not np.array_equal(y, y.T):
            raise DomainError("Y* must be symmetric")
        if np.any(np.diag(y) != 0):
            raise DomainError("Y* must have a zero diagonal")
        if not np.all(np.isin(y, (-1, 0, 1))):
            raise DomainError("Y* entries must be -1, 0 or +1")
        self.ystar = y.astype(float)

    @property
    def m(self) -> int:
        return self.ystar.shape[0]


@dataclass
class EigenmodelState:
    U: np.ndarray
    Lambda: np.ndarray
    c: float

    def pack(self) -> np.ndarray:
        return np.concatenate((np.reshape(self.U, -1, order="F"), np.ravel(self.Lambda), [float(self.c)]))

    @classmethod
    def unpack(cls, x, m: int, p: int) -> "EigenmodelState":
        return cls(np.reshape(x[: m * p], (m, p), order="F"), x[m * p : m * p + p], float(x[-1]))


class Eigenmodel(Target):
    """Probit network eigenmodel ``P(edge ij) = Phi([U Lambda U^T]_ij + c)``.

    Priors: ``U`` uniform on the Stiefel manifold, ``Lambda_rr ~ N(0, m)``,
    ``c ~ N(0, 10^2)``. The state lives on ``V(m, p) x R^p x R``.
    """

    def __init__(self, data: EigenmodelData, p: int):
        self.data = data
        self.m = data.m
        self.p = int(p)
        self.manifold = Product((Stiefel(self.m, self.p), Euclidean(self.p), Euclidean(1)))
        iu = np.triu_indices(self.m, 1)
        observed = data.ystar[iu] != 0.0
        self._rows = iu[0][observed]
        self._cols = iu[1][observed]
        self._y = data.ystar[self._rows, self._cols]

    def eta(self, state: EigenmodelState) -> np.ndarray:
        return (state.U * state.Lambda) @ state.U.T + state.c

    def _check(self, s: EigenmodelState):
        if np.shape(s.U) != (self.m, self.p) or np.shape(s.Lambda) != (self.p,):
            raise DimensionError(f"state does not match m={self.m}, p={self.p}")

    def log_posterior(self, s: EigenmodelState) -> float:
        self._check(s)
        U, lam, c = s.U, s.Lambda, s.c
        # eta on observed pairs only
        eta = np.einsum("kr,kr->k", U[self._rows] * lam, U[self._cols]) + c
        ll = float(np.sum(log_probit(self._y * eta)))
        return ll - float(lam @ lam) / (2.0 * self.m) - c * c / 200.0

    def gradients(self, s: EigenmodelState):
        self._check(s)
        U, lam, c = s.U, s.Lambda, s.c
        eta = np.einsum("kr,kr->k", U[self._rows] * lam, U[self._cols]) + c
        deta = self._y * probit_ratio(self._y * eta)
        G = np.zeros((self.m, self.m))
        G[self._rows, self._cols] = deta
        G += G.T
        GU = G @ U
        grad_u = GU * lam
        grad_lam = 0.5 * np.einsum("ir,ir->r", U, GU) - lam / self.m
        grad_c = float(deta.sum()) - c / 100.0
        return grad_u, grad_lam, grad_c

    def log_density(self, x):
        return self.log_posterior(EigenmodelState.unpack(x, self.m, self.p))

    def gradient(self, x):
        gu, gl, gc = self.gradients(EigenmodelState.unpack(x, self.m, self.p))
        return np.concatenate((np.reshape(gu, -1, order="F"), gl, [gc]))


def eigenmodel_log_posterior(s: EigenmodelState, data: EigenmodelData) -> float:
    return Eigenmodel(data, np.shape(s.U)[1]).log_posterior(s)


def eigenmodel_gradients(s: EigenmodelState, data: EigenmodelData):
    """Gradients ``(dU, dLambda, dc)`` of the eigenmodel log-posterior."""
    return Eigenmodel(data, np.shape(s.U)[1]).gradients(s)
