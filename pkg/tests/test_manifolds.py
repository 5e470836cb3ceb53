import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geomc.errors import BoundaryError, DimensionError, DomainError, ManifoldError
from geomc.manifolds import (
    AffineSubspace,
    Euclidean,
    OrthogonalGroup,
    PhasePoint,
    Product,
    ReflectiveSimplex,
    Sphere,
    Stiefel,
    geodesic_flow,
    reflective_flow,
    sample_velocity,
    simplex_to_sphere,
    sphere_to_simplex,
    tangent_project,
)

MANIFOLDS = [
    Euclidean(4),
    AffineSubspace(np.linalg.qr(np.array([[1.0, 1.0, 0.0], [0.0, 1.0, -1.0]]).T)[0], np.array([0.3, -0.2])),
    Sphere(2),
    Sphere(6),
    Stiefel(5, 2),
    Stiefel(4, 4),
    OrthogonalGroup(3),
    ReflectiveSimplex(5),
    Product([Sphere(3), Stiefel(4, 2), Euclidean(2)]),
]
IDS = [repr(m) for m in MANIFOLDS]


def phase(m, rng, scale=1.0):
    x = m.random_point(rng)
    return x, scale * m.sample_velocity(x, rng)


@pytest.mark.parametrize("m", MANIFOLDS, ids=IDS)
def test_random_point_on_manifold_and_velocity_tangent(m, rng):
    x, v = phase(m, rng)
    assert m.contains(x)
    np.testing.assert_allclose(m.project(x, v), v, atol=1e-12)


@pytest.mark.parametrize("m", MANIFOLDS, ids=IDS)
def test_projection_idempotent(m, rng):
    x = m.random_point(rng)
    u = rng.standard_normal(m.ambient_dim)
    w = m.project(x, u)
    np.testing.assert_allclose(m.project(x, w), w, atol=1e-12)


@pytest.mark.parametrize("m", MANIFOLDS, ids=IDS)
def test_zero_velocity_is_stationary(m, rng):
    x = m.random_point(rng)
    x1, v1 = m.flow(x, np.zeros_like(x), 0.7)
    np.testing.assert_allclose(x1, x, atol=1e-14)
    np.testing.assert_array_equal(v1, 0.0)


@pytest.mark.parametrize("m", MANIFOLDS, ids=IDS)
@pytest.mark.parametrize("t", [0.01, 0.3, 1.7])
def test_flow_reversibility(m, t, rng):
    for _ in range(5):
        x, v = phase(m, rng)
        x1, v1 = m.flow(x, v, t)
        x2, v2 = m.flow(x1, -v1, t)
        np.testing.assert_allclose(x2, x, atol=1e-8)
        np.testing.assert_allclose(-v2, v, atol=1e-8)


@pytest.mark.parametrize("m", MANIFOLDS, ids=IDS)
def test_flow_preserves_speed_and_manifold(m, rng):
    x, v = phase(m, rng)
    x1, v1 = m.flow(x, v, 0.9)
    assert m.residual(x1) < 1e-10
    assert np.linalg.norm(v1) == pytest.approx(np.linalg.norm(v), rel=1e-10)
    np.testing.assert_allclose(m.project(x1, v1), v1, atol=1e-10)


@pytest.mark.parametrize("m", [m for m in MANIFOLDS if not isinstance(m, ReflectiveSimplex)], ids=lambda m: repr(m))
def test_flow_group_property(m, rng):
    x, v = phase(m, rng)
    a = m.flow(*m.flow(x, v, 0.4), 0.5)
    b = m.flow(x, v, 0.9)
    np.testing.assert_allclose(a[0], b[0], atol=1e-10)
    np.testing.assert_allclose(a[1], b[1], atol=1e-10)


# sphere


def test_sphere_projection_example():
    np.testing.assert_allclose(Sphere(2).project(np.array([1.0, 0.0]), np.array([5.0, 3.0])), [0.0, 3.0])


def test_sphere_quarter_circle():
    x, v = Sphere(2).flow(np.array([1.0, 0.0]), np.array([0.0, math.pi / 2]), 1.0)
    np.testing.assert_allclose(x, [0.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(v, [-math.pi / 2, 0.0], atol=1e-12)


def test_sphere_flow_solves_geodesic_ode(rng):
    # x'' = -|v|^2 x on the sphere; compare central second difference
    m = Sphere(4)
    x, v = phase(m, rng)
    h = 1e-4
    xp, _ = m.flow(x, v, h)
    xm, _ = m.flow(x, v, -h)
    acc = (xp - 2 * x + xm) / h**2
    np.testing.assert_allclose(acc, -(v @ v) * x, atol=1e-5)


def test_sphere_renormalisation_controls_drift(rng):
    for renorm, tol in [(True, 1e-12), (False, 1e-7)]:
        m = Sphere(10, renormalize=renorm)
        x, v = phase(m, rng)
        for _ in range(10_000):
            x, v = m.flow(x, v, 0.01)
        assert m.residual(x) <= tol


# stiefel


def explicit_normal_basis(X):
    """Orthonormal basis of {X S : S symmetric}: p + C(p, 2) vectors."""
    d, p = X.shape
    cols = []
    for i in range(p):
        e = np.zeros((p, p))
        e[i, i] = 1.0
        cols.append((X @ e).reshape(-1, order="F"))
    for i, j in itertools.combinations(range(p), 2):
        e = np.zeros((p, p))
        e[i, j] = e[j, i] = 1.0 / math.sqrt(2.0)
        cols.append((X @ e).reshape(-1, order="F"))
    return np.column_stack(cols)


def test_stiefel_projection_matches_explicit_normal_basis(rng):
    m = Stiefel(4, 2)
    for _ in range(10):
        x = m.random_point(rng)
        u = rng.standard_normal(8)
        w = m.project(x, u)
        X, W = m.as_matrix(x), m.as_matrix(w)
        np.testing.assert_allclose(W.T @ X + X.T @ W, 0.0, atol=1e-10)
        N = explicit_normal_basis(X)
        assert N.shape[1] == 2 + 1
        np.testing.assert_allclose(w, u - N @ (N.T @ u), atol=1e-10)


def test_orthogonal_group_annihilates_normal_direction(rng):
    m = Stiefel(3, 3)
    x = m.random_point(rng)
    np.testing.assert_allclose(m.project(x, x), 0.0, atol=1e-14)


def test_stiefel_one_column_is_the_sphere(rng):
    st, sp = Stiefel(3, 1), Sphere(3)
    for _ in range(5):
        x, v = phase(sp, rng)
        a, b = st.flow(x, v, 0.8), sp.flow(x, v, 0.8)
        np.testing.assert_allclose(a[0], b[0], atol=1e-10)
        np.testing.assert_allclose(a[1], b[1], atol=1e-10)


def test_stiefel_invariants_along_flow(rng):
    m = Stiefel(5, 2)
    x, v = phase(m, rng)
    X, V = m.as_matrix(x), m.as_matrix(v)
    x1, v1 = m.flow(x, v, 0.3)
    X1, V1 = m.as_matrix(x1), m.as_matrix(v1)
    np.testing.assert_allclose(X1.T @ X1, np.eye(2), atol=1e-9)
    np.testing.assert_allclose(X1.T @ V1, X.T @ V, atol=1e-9)


def test_stiefel_flow_velocity_is_derivative(rng):
    m = Stiefel(6, 3)
    x, v = phase(m, rng)
    h = 1e-6
    xp, _ = m.flow(x, v, h)
    xm, _ = m.flow(x, v, -h)
    np.testing.assert_allclose((xp - xm) / (2 * h), v, atol=1e-7)


def test_orthogonal_group_matches_square_stiefel(rng):
    a, b = OrthogonalGroup(4), Stiefel(4, 4)
    x, v = phase(a, rng)
    np.testing.assert_allclose(a.flow(x, v, 0.6)[0], b.flow(x, v, 0.6)[0], atol=1e-12)


# simplex


def test_simplex_reflection_example():
    m = ReflectiveSimplex(2)
    x, v = reflective_flow(m, PhasePoint(np.array([0.5, 0.5]), np.array([0.8, -0.8])), 1.0)
    np.testing.assert_allclose(x, [0.7, 0.3], atol=1e-12)
    np.testing.assert_allclose(v, [-0.8, 0.8], atol=1e-12)


def ode_with_reflection(x, v, eps, h):
    """Small-step Euler motion, mirroring the velocity when a step would exit."""
    d = x.size
    x, v = x.copy(), v.copy()
    for _ in range(int(round(eps / h))):
        y = x + h * v
        j = int(np.argmin(y))
        if y[j] < 0:
            n = (d * np.eye(d)[j] - 1.0) / math.sqrt(d * (d - 1))
            v = v - 2 * (v @ n) * n
            y = x + h * v
        x = y
    return x, v


def test_simplex_reflection_matches_small_step_oracle():
    m = ReflectiveSimplex(2)
    x0, v0 = np.array([0.5, 0.5]), np.array([0.8, -0.8])
    xo, vo = ode_with_reflection(x0, v0, 1.0, 1e-6)
    x, v = m.flow(x0, v0, 1.0)
    np.testing.assert_allclose(x, xo, atol=1e-5)
    np.testing.assert_allclose(v, vo, atol=1e-12)


def test_simplex_reflection_matches_oracle_in_3d(rng):
    m = ReflectiveSimplex(3)
    x0 = np.array([0.2, 0.3, 0.5])
    v0 = m.project(x0, np.array([1.0, -2.0, 0.4]))
    xo, vo = ode_with_reflection(x0, v0, 0.5, 1e-6)
    x, v = m.flow(x0, v0, 0.5)
    np.testing.assert_allclose(x, xo, atol=1e-4)
    np.testing.assert_allclose(v, vo, atol=1e-10)


def test_simplex_interior_motion_is_a_line():
    m = ReflectiveSimplex(3)
    x = np.full(3, 1 / 3)
    v = np.array([0.3, -0.1, -0.2])
    np.testing.assert_allclose(m.flow(x, v, 0.1)[0], x + 0.1 * v, atol=1e-15)


def test_simplex_long_flow_invariants(rng):
    m = ReflectiveSimplex(6)
    for _ in range(20):
        x, v = phase(m, rng)
        x1, v1 = m.flow(x, v, 2.0)
        assert x1.sum() == pytest.approx(1.0, abs=1e-12)
        assert x1.min() >= 0.0
        assert np.linalg.norm(v1) == pytest.approx(np.linalg.norm(v), abs=1e-10)


def test_simplex_boundary_start_is_an_error():
    m = ReflectiveSimplex(3)
    with pytest.raises(BoundaryError):
        m.flow(np.array([0.0, 0.5, 0.5]), np.array([0.1, -0.05, -0.05]), 0.1)


# products and module-level helpers


def test_product_per_component_durations(rng):
    m = Product([Sphere(3), Euclidean(2)])
    x, v = phase(m, rng)
    x1, v1 = m.flow(x, v, [0.2, 0.5])
    a = Sphere(3).flow(x[:3], v[:3], 0.2)
    np.testing.assert_allclose(x1[:3], a[0])
    np.testing.assert_allclose(x1[3:], x[3:] + 0.5 * v[3:])
    with pytest.raises(DimensionError):
        m.flow(x, v, [0.1, 0.2, 0.3])


def test_sample_velocity_examples(rng):
    x = Sphere(3).random_point(rng)
    v = sample_velocity(Sphere(3), x, rng)
    assert abs(x @ v) < 1e-12
    a, b = np.random.default_rng(5), np.random.default_rng(5)
    np.testing.assert_array_equal(sample_velocity(Euclidean(4), np.zeros(4), a), b.standard_normal(4))


def test_sample_velocity_covariance(rng):
    m = Sphere(3)
    x = np.array([0.6, 0.0, 0.8])
    draws = np.array([m.sample_velocity(x, rng) for _ in range(100_000)])
    cov = draws.T @ draws / draws.shape[0]
    np.testing.assert_allclose(cov, np.eye(3) - np.outer(x, x), atol=0.02)


def test_module_helpers_check_inputs():
    with pytest.raises(ManifoldError):
        tangent_project(Sphere(3), np.array([1.0, 1.0, 0.0]), np.ones(3))
    with pytest.raises(DimensionError):
        geodesic_flow(Sphere(3), PhasePoint(np.array([1.0, 0.0, 0.0]), np.ones(2)), 0.1)
    with pytest.raises(TypeError):
        reflective_flow(Sphere(3), PhasePoint(np.array([1.0, 0.0, 0.0]), np.zeros(3)), 0.1)


def test_simplex_sphere_maps():
    np.testing.assert_array_equal(simplex_to_sphere([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
    np.testing.assert_allclose(simplex_to_sphere([0.25, 0.25, 0.5]), [0.5, 0.5, 1 / math.sqrt(2)], atol=1e-15)
    with pytest.raises(DomainError):
        simplex_to_sphere([1.2, -0.2])


@given(st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12).filter(lambda t: sum(t) > 1e-3))
def test_simplex_to_sphere_norm(theta):
    theta = np.array(theta) / np.sum(theta)
    x = simplex_to_sphere(theta)
    assert np.linalg.norm(x) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(sphere_to_simplex(x), theta, atol=1e-15)


@given(st.integers(2, 8), st.floats(-3.0, 3.0), st.integers(0, 2**32 - 1))
def test_sphere_reversibility_property(d, t, seed):
    m = Sphere(d)
    x, v = phase(m, np.random.default_rng(seed), scale=2.0)
    x1, v1 = m.flow(x, v, t)
    x2, v2 = m.flow(x1, -v1, t)
    np.testing.assert_allclose(x2, x, atol=1e-8)
    np.testing.assert_allclose(-v2, v, atol=1e-8)


@given(st.integers(3, 7), st.floats(0.0, 5.0), st.integers(0, 2**32 - 1))
def test_simplex_reversibility_property(d, t, seed):
    m = ReflectiveSimplex(d)
    x, v = phase(m, np.random.default_rng(seed))
    x1, v1 = m.flow(x, v, t)
    if x1.min() <= 0.0:
        return  # ended exactly on a facet; the reverse flow is undefined there
    x2, v2 = m.flow(x1, -v1, t)
    np.testing.assert_allclose(x2, x, atol=1e-8)
    np.testing.assert_allclose(-v2, v, atol=1e-8)
