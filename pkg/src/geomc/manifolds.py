"""Embedded manifolds with closed-form geodesic flows.

Points and velocities are flat float arrays in ambient coordinates. Matrix
valued manifolds (Stiefel, orthogonal group) stack columns, so a ``d x p`` point
``X`` is stored as ``X.reshape(-1, order="F")``.

Each manifold provides

* ``project(x, u)``: orthogonal projection of an ambient vector onto the
  tangent space at ``x``;
* ``flow(x, v, t)``: the geodesic flow, returning the new ``(x, v)``;
* ``sample_velocity(x, rng)``: a draw from ``N(0, I - N N^T)``;
* ``contains(x)`` / ``residual(x)``: membership test and constraint residual.

The methods do not validate their inputs; the module-level functions
(:func:`tangent_project`, :func:`geodesic_flow`, ...) do, and raise
:class:`~geomc.errors.ManifoldError` for points off the manifold.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from geomc.errors import BoundaryError, DimensionError, DomainError, ManifoldError
from geomc.numeric import matrix_exp, project_out_basis

__all__ = [
    "PhasePoint",
    "Manifold",
    "Euclidean",
    "AffineSubspace",
    "Sphere",
    "Stiefel",
    "OrthogonalGroup",
    "ReflectiveSimplex",
    "Product",
    "tangent_project",
    "geodesic_flow",
    "reflective_flow",
    "sample_velocity",
    "simplex_to_sphere",
    "sphere_to_simplex",
]

MEMBERSHIP_TOL = 1e-9
# constraint residual above which a flow output is pulled back onto the manifold
RENORM_TOL = 1e-12
MAX_REFLECTIONS = 10**6


class PhasePoint(NamedTuple):
    x: np.ndarray
    v: np.ndarray


class Manifold:
    """Common interface. Subclasses set ``ambient_dim``."""

    ambient_dim: int

    def project(self, x, u):
        raise NotImplementedError

    def flow(self, x, v, t):
        raise NotImplementedError

    def residual(self, x) -> float:
        raise NotImplementedError

    def contains(self, x, tol=MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x)
        return x.shape == (self.ambient_dim,) and bool(self.residual(x) <= tol)

    def sample_velocity(self, x, rng):
        return self.project(x, rng.standard_normal(self.ambient_dim))

    def random_point(self, rng):
        """A random point on the manifold (uniform where that makes sense)."""
        raise NotImplementedError


class Euclidean(Manifold):
    """``R^n``: identity projection and straight-line geodesics."""

    def __init__(self, n: int):
        if n < 1:
            raise DomainError("dimension must be at least 1")
        self.n = self.ambient_dim = int(n)

    def __repr__(self):
        return f"Euclidean({self.n})"

    def project(self, x, u):
        return u

    def flow(self, x, v, t):
        return x + t * v, v

    def residual(self, x):
        return 0.0 if np.all(np.isfinite(x)) else math.inf

    def sample_velocity(self, x, rng):
        return rng.standard_normal(self.n)

    def random_point(self, rng):
        return rng.standard_normal(self.n)


class AffineSubspace(Manifold):
    """``{x : N^T x = b}`` for an orthonormal normal basis ``N`` (``n x k``)."""

    def __init__(self, normals, offset=None):
        normals = np.atleast_2d(np.asarray(normals, dtype=float))
        if normals.shape[0] == 1 and normals.shape[1] > 1:
            normals = normals.T
        if not np.allclose(normals.T @ normals, np.eye(normals.shape[1]), atol=1e-10):
            raise DomainError("normal basis must have orthonormal columns")
        self.normals = normals
        self.ambient_dim = normals.shape[0]
        self.offset = np.zeros(normals.shape[1]) if offset is None else np.asarray(offset, dtype=float)

    def __repr__(self):
        return f"AffineSubspace(n={self.ambient_dim}, k={self.normals.shape[1]})"

    def project(self, x, u):
        return project_out_basis(self.normals, u)

    def flow(self, x, v, t):
        return x + t * v, v

    def residual(self, x):
        return float(np.max(np.abs(self.normals.T @ x - self.offset), initial=0.0))

    def random_point(self, rng):
        z = rng.standard_normal(self.ambient_dim)
        return project_out_basis(self.normals, z) + self.normals @ self.offset


class Sphere(Manifold):
    """Unit sphere in ``R^d``; geodesics are great circles."""

    def __init__(self, d: int, renormalize: bool = True):
        if d < 1:
            raise DomainError("dimension must be at least 1")
        self.d = self.ambient_dim = int(d)
        self.renormalize = renormalize

    def __repr__(self):
        return f"Sphere({self.d})"

    def project(self, x, u):
        return u - x * (x @ u)

    def flow(self, x, v, t):
        alpha = math.sqrt(v @ v)
        if alpha == 0.0:
            return x, v
        c = math.cos(alpha * t)
        s = math.sin(alpha * t)
        x1 = x * c + v * (s / alpha)
        v1 = v * c - x * (alpha * s)
        if self.renormalize:
            nrm2 = x1 @ x1
            if abs(nrm2 - 1.0) > RENORM_TOL:
                x1 = x1 / math.sqrt(nrm2)
                v1 = v1 - x1 * (x1 @ v1)
        return x1, v1

    def residual(self, x):
        return abs(math.sqrt(x @ x) - 1.0)

    def random_point(self, rng):
        z = rng.standard_normal(self.d)
        return z / np.linalg.norm(z)


class Stiefel(Manifold):
    """``d x p`` matrices with orthonormal columns, stored column-stacked."""

    def __init__(self, d: int, p: int, renormalize: bool = True):
        if p < 1 or d < 1:
            raise DomainError("dimensions must be at least 1")
        if p > d:
            raise DomainError(f"Stiefel manifold needs p <= d, got d={d}, p={p}")
        self.d, self.p = int(d), int(p)
        self.ambient_dim = self.d * self.p
        self.renormalize = renormalize

    def __repr__(self):
        return f"Stiefel({self.d}, {self.p})"

    def as_matrix(self, x):
        return np.reshape(x, (self.d, self.p), order="F")

    def as_vector(self, m):
        return np.reshape(m, -1, order="F")

    def project(self, x, u):
        X = self.as_matrix(x)
        U = self.as_matrix(u)
        XtU = X.T @ U
        return self.as_vector(U - 0.5 * X @ (XtU + XtU.T))

    def _flow_matrices(self, X, V, t):
        p = self.p
        A = X.T @ V
        S = V.T @ V
        blk = np.empty((2 * p, 2 * p))
        blk[:p, :p] = A
        blk[:p, p:] = -S
        blk[p:, :p] = np.eye(p)
        blk[p:, p:] = A
        E = matrix_exp(t * blk)
        R = matrix_exp(-t * A)
        XV = np.hstack((X, V)) @ E
        return XV[:, :p] @ R, XV[:, p:] @ R

    def flow(self, x, v, t):
        X = self.as_matrix(x)
        V = self.as_matrix(v)
        X1, V1 = self._flow_matrices(X, V, t)
        if self.renormalize:
            X1, V1 = self._renormalize(X1, V1)
        return self.as_vector(X1), self.as_vector(V1)

    def _renormalize(self, X, V):
        G = X.T @ X
        G[np.diag_indices_from(G)] -= 1.0
        if np.abs(G).max() <= RENORM_TOL:
            return X, V
        Q, R = np.linalg.qr(X)
        Q = Q * np.where(np.diag(R) < 0.0, -1.0, 1.0)
        QtV = Q.T @ V
        return Q, V - 0.5 * Q @ (QtV + QtV.T)

    def residual(self, x):
        X = self.as_matrix(x)
        G = X.T @ X
        G[np.diag_indices_from(G)] -= 1.0
        return float(np.abs(G).max())

    def random_point(self, rng):
        Q, R = np.linalg.qr(rng.standard_normal((self.d, self.p)))
        return self.as_vector(Q * np.where(np.diag(R) < 0.0, -1.0, 1.0))


class OrthogonalGroup(Stiefel):
    """``O(d)``: the square Stiefel manifold, with the simpler flow
    ``[X(t), V(t)] = [X, V] exp(tA)``, ``A = X^T V``."""

    def __init__(self, d: int, renormalize: bool = True):
        super().__init__(d, d, renormalize=renormalize)

    def __repr__(self):
        return f"OrthogonalGroup({self.d})"

    def _flow_matrices(self, X, V, t):
        R = matrix_exp(t * (X.T @ V))
        return X @ R, V @ R


class ReflectiveSimplex(Manifold):
    """Probability simplex in ``R^d``. Straight-line flow inside the plane
    ``sum(x) = 1`` that reflects off the facets ``x_i = 0``."""

    def __init__(self, d: int):
        if d < 2:
            raise DomainError("simplex needs d >= 2")
        self.d = self.ambient_dim = int(d)
        self._scale = 1.0 / math.sqrt(d * (d - 1))

    def __repr__(self):
        return f"ReflectiveSimplex({self.d})"

    def project(self, x, u):
        return u - u.mean()

    def residual(self, x):
        return max(abs(x.sum() - 1.0), -min(x.min(), 0.0))

    def random_point(self, rng):
        return rng.dirichlet(np.ones(self.d))

    def flow(self, x, v, t):
        if t < 0:
            x1, v1 = self._reflect(x, -v, -t)
            return x1, -v1
        return self._reflect(x, v, t)

    def _reflect(self, x, v, eps):
        if x.min() <= 0.0:
            raise BoundaryError("simplex flow started on the boundary")
        x = x.copy()
        v = v.copy()
        d = self.d
        budget = eps
        n_reflect = 0
        while budget > 0.0:
            neg = v < 0.0
            if neg.any():
                times = np.full(d, math.inf)
                times[neg] = -x[neg] / v[neg]
                j = int(np.argmin(times))
                kappa = max(times[j], 0.0)
            else:
                kappa = math.inf
            step = min(budget, kappa)
            x += step * v
            budget -= step
            if budget > 0.0:
                x[j] = 0.0
                # reflect about (d e_j - 1) / sqrt(d(d-1)); v stays in the plane
                k = 2.0 * (d * v[j] - v.sum()) * self._scale * self._scale
                v += k
                v[j] -= k * d
                n_reflect += 1
                if n_reflect > MAX_REFLECTIONS:
                    raise ManifoldError("too many boundary reflections in one flow")
        return x, v


class Product(Manifold):
    """Cartesian product; points are the concatenation of component points.

    ``flow`` accepts a scalar duration or one duration per component.
    """

    def __init__(self, components: Sequence[Manifold]):
        components = tuple(components)
        if not components:
            raise DomainError("product manifold needs at least one component")
        self.components = components
        sizes = [c.ambient_dim for c in components]
        self.offsets = np.concatenate(([0], np.cumsum(sizes)))
        self.slices = tuple(slice(int(a), int(b)) for a, b in zip(self.offsets[:-1], self.offsets[1:]))
        self.ambient_dim = int(self.offsets[-1])

    def __repr__(self):
        return "Product(" + ", ".join(map(repr, self.components)) + ")"

    def split(self, x):
        return [x[s] for s in self.slices]

    def project(self, x, u):
        return np.concatenate([c.project(x[s], u[s]) for c, s in zip(self.components, self.slices)])

    def _durations(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return [float(t)] * len(self.components)
        if t.shape != (len(self.components),):
            raise DimensionError(f"need {len(self.components)} durations, got {t.shape}")
        return [float(ti) for ti in t]

    def flow(self, x, v, t):
        xs, vs = [], []
        for c, s, ti in zip(self.components, self.slices, self._durations(t)):
            xi, vi = c.flow(x[s], v[s], ti)
            xs.append(xi)
            vs.append(vi)
        return np.concatenate(xs), np.concatenate(vs)

    def residual(self, x):
        return max(c.residual(x[s]) for c, s in zip(self.components, self.slices))

    def sample_velocity(self, x, rng):
        return np.concatenate([c.sample_velocity(x[s], rng) for c, s in zip(self.components, self.slices)])

    def random_point(self, rng):
        return np.concatenate([c.random_point(rng) for c in self.components])

    def expand(self, per_component):
        """Broadcast one value per component to an ambient-length vector."""
        vals = np.asarray(per_component, dtype=float)
        if vals.ndim == 0:
            return np.full(self.ambient_dim, float(vals))
        return np.repeat(vals, np.diff(self.offsets))


def _check_point(m: Manifold, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (m.ambient_dim,):
        raise DimensionError(f"{m!r} expects points of length {m.ambient_dim}, got shape {x.shape}")
    if not m.contains(x):
        raise ManifoldError(f"point is not on {m!r} (residual {m.residual(x):.3g})")
    return x


def _check_vector(m: Manifold, u):
    u = np.asarray(u, dtype=float)
    if u.shape != (m.ambient_dim,):
        raise DimensionError(f"{m!r} expects vectors of length {m.ambient_dim}, got shape {u.shape}")
    return u


def tangent_project(m: Manifold, x, u):
    """Project ambient vector ``u`` onto the tangent space of ``m`` at ``x``."""
    x = _check_point(m, x)
    return m.project(x, _check_vector(m, u))


def geodesic_flow(m: Manifold, state: PhasePoint, t) -> PhasePoint:
    """Follow the geodesic from ``state`` for time ``t`` (may be negative).

    On a :class:`ReflectiveSimplex` this is the reflecting flow.
    """
    x = _check_point(m, state[0])
    v = _check_vector(m, state[1])
    return PhasePoint(*m.flow(x, v, t))


def reflective_flow(m: ReflectiveSimplex, state: PhasePoint, eps: float) -> PhasePoint:
    """Straight-line motion in the simplex with reflection at the facets."""
    if not isinstance(m, ReflectiveSimplex):
        raise TypeError("reflective_flow needs a ReflectiveSimplex")
    return geodesic_flow(m, state, eps)


def sample_velocity(m: Manifold, x, rng) -> np.ndarray:
    """Draw a velocity from the standard Gaussian on the tangent space at ``x``."""
    return m.sample_velocity(_check_point(m, x), rng)


def simplex_to_sphere(theta):
    """Elementwise square root, mapping the simplex onto the positive orthant."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0.0):
        raise DomainError("simplex coordinates must be non-negative")
    return np.sqrt(theta)


def sphere_to_simplex(x):
    """Elementwise square; defined on every orthant."""
    x = np.asarray(x, dtype=float)
    return x * x
