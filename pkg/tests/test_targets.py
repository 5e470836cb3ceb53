import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from geomc.errors import DimensionError, DomainError
from geomc.manifolds import Sphere
from geomc.sampler import GeodesicHMC, HmcConfig, run_chain
from geomc.targets import (
    BinghamVonMisesFisher,
    DirichletSimplex,
    DirichletSphere,
    Eigenmodel,
    EigenmodelData,
    EigenmodelState,
    MatchRecord,
    VonMisesFisher,
    Volleyball,
    eigenmodel_gradients,
    eigenmodel_log_posterior,
)

FIG4_A = np.diag([-20.0, -10.0, 0.0, 10.0, 20.0])


def central_diff(f, x, h=1e-6):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def assert_fd(target, x, rtol):
    g = target.gradient(x)
    fd = central_diff(target.log_density, x)
    np.testing.assert_allclose(g, fd, rtol=rtol, atol=rtol * max(1.0, np.abs(fd).max()))


def random_matches(rng, n, d=9):
    out = []
    for _ in range(n):
        k = int(rng.integers(1, 4))
        players = rng.choice(d, 2 * k, replace=False) + 1
        out.append(MatchRecord(frozenset(players[:k].tolist()), frozenset(players[k:].tolist())))
    return out


def random_eigen_data(rng, m, observed=0.8):
    y = np.zeros((m, m), dtype=int)
    iu = np.triu_indices(m, 1)
    vals = rng.choice([-1, 1], size=iu[0].size) * (rng.random(iu[0].size) < observed)
    y[iu] = vals
    return EigenmodelData(y + y.T)


def random_eigen_state(rng, m, p):
    q, _ = np.linalg.qr(rng.standard_normal((m, p)))
    return EigenmodelState(q, rng.normal(0, 3, p), float(rng.normal()))


# von Mises-Fisher and BVMF


def test_vmf_values(rng):
    x = Sphere(4).random_point(rng)
    assert VonMisesFisher(np.zeros(4)).log_density(x) == 0.0
    c = np.array([1.0, -2.0, 0.5, 2.0])
    assert VonMisesFisher(c).log_density(c / np.linalg.norm(c)) == pytest.approx(np.linalg.norm(c))


def test_vmf_mean_resultant_length_against_quadrature():
    # on S^2 the last coordinate of a uniform point is uniform on [-1, 1]
    num = integrate.quad(lambda t: t * math.exp(2 * t), -1, 1)[0]
    den = integrate.quad(lambda t: math.exp(2 * t), -1, 1)[0]
    target = VonMisesFisher([0.0, 0.0, 2.0])
    trace = run_chain(GeodesicHMC(HmcConfig(0.1, 10)), target.manifold, target, np.array([0.0, 0.0, 1.0]),
                      100_000, np.random.default_rng(11))
    assert trace.samples[:, 2].mean() == pytest.approx(num / den, abs=0.01)


def test_bvmf_examples():
    t = BinghamVonMisesFisher(np.zeros(5), np.zeros((5, 5)))
    x = np.eye(5)[2]
    assert t.log_density(x) == 0.0
    np.testing.assert_array_equal(t.gradient(x), 0.0)
    t = BinghamVonMisesFisher(np.zeros(5), FIG4_A)
    e5 = np.eye(5)[4]
    assert t.log_density(e5) == 20.0
    np.testing.assert_array_equal(t.gradient(e5), [0, 0, 0, 0, 40])


def test_bvmf_gradient_fd(rng):
    for _ in range(20):
        b = rng.standard_normal((5, 5))
        t = BinghamVonMisesFisher(rng.standard_normal(5), b + b.T)
        assert_fd(t, rng.standard_normal(5), 1e-6)


def test_bvmf_rejects_asymmetric():
    with pytest.raises(DomainError):
        BinghamVonMisesFisher(np.zeros(2), np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DimensionError):
        BinghamVonMisesFisher(np.zeros(3), np.eye(2))


# Dirichlet


def test_dirichlet_sphere_examples(rng):
    x = Sphere(6).random_point(rng)
    assert DirichletSphere(np.full(6, 0.5)).log_density(x) == 0.0
    d = 7
    assert DirichletSphere(np.ones(d)).log_density(np.full(d, d**-0.5)) == pytest.approx(-(d / 2) * math.log(d))


def test_dirichlet_sphere_zero_coordinate_sentinel():
    x = np.array([1.0, 0.0, 0.0])
    assert DirichletSphere([1.0, 0.3, 2.0]).log_density(x) == -math.inf
    assert DirichletSphere([1.0, 0.5, 0.5]).log_density(x) == 0.0
    with pytest.raises(DomainError):
        DirichletSphere([1.0, 0.5, 0.5]).gradient(x)


def test_dirichlet_sphere_moments():
    target = DirichletSphere([2.0, 3.0, 4.0])
    x0 = np.sqrt(np.full(3, 1 / 3))
    trace = run_chain(GeodesicHMC(HmcConfig(0.1, 5)), target.manifold, target, x0, 100_000,
                      np.random.default_rng(12))
    theta = trace.samples[1000:] ** 2
    # oracle: Dirichlet draws as normalised Gamma variables
    g = np.random.default_rng(13).gamma([2.0, 3.0, 4.0], size=(200_000, 3))
    ref = (g / g.sum(axis=1, keepdims=True)).mean(axis=0)
    np.testing.assert_allclose(theta.mean(axis=0), ref, atol=0.01)
    np.testing.assert_allclose(ref, [2 / 9, 3 / 9, 4 / 9], atol=0.005)


def test_dirichlet_simplex_examples():
    assert DirichletSimplex(np.ones(4)).log_density(np.array([0.1, 0.2, 0.3, 0.4])) == 0.0
    assert DirichletSimplex([2.0, 2.0]).log_density(np.array([0.5, 0.5])) == pytest.approx(2 * math.log(0.5))
    assert DirichletSimplex([2.0, 2.0]).log_density(np.array([1.5, -0.5])) == -math.inf
    with pytest.raises(DomainError):
        DirichletSimplex([2.0, 2.0]).gradient(np.array([1.0, 0.0]))
    with pytest.raises(DomainError):
        DirichletSimplex([2.0, 0.0])


def test_dirichlet_gradients_fd(rng):
    for _ in range(20):
        alpha = rng.uniform(0.2, 5.0, 5)
        theta = rng.dirichlet(np.full(5, 3.0))
        assert_fd(DirichletSimplex(alpha), theta, 1e-6)
        assert_fd(DirichletSphere(alpha), np.sqrt(theta) * rng.choice([-1, 1], 5), 1e-6)


# volleyball


def test_volleyball_prior_only(rng):
    x = Sphere(9).random_point(rng)
    assert Volleyball([], 0.7, 9).log_density(x) == DirichletSphere(np.full(9, 0.7)).log_density(x)


def test_volleyball_single_match_term():
    x = np.array([0.6, 0.2, 0.3, 0.4, 0.5])
    x = x / np.linalg.norm(x[2:]) * math.sqrt(1 - 0.4)
    x[0], x[1] = 0.6, 0.2
    t = Volleyball([MatchRecord({1}, {2})], 0.5, 5)
    assert t.log_density(x) == pytest.approx(math.log(0.9), rel=1e-12)


def test_volleyball_gradient_fd(rng):
    for on in ("sphere", "simplex"):
        for _ in range(10):
            t = Volleyball(random_matches(rng, 20), rng.uniform(0.3, 3.0), 9, on=on)
            theta = rng.dirichlet(np.full(9, 2.0))
            x = np.sqrt(theta) * rng.choice([-1, 1], 9) if on == "sphere" else theta
            assert_fd(t, x, 1e-5)


@given(st.integers(0, 2**32 - 1), st.lists(st.booleans(), min_size=9, max_size=9))
def test_volleyball_sign_flip_invariance(seed, flips):
    rng = np.random.default_rng(seed)
    t = Volleyball(random_matches(rng, 15), 0.8, 9)
    x = Sphere(9).random_point(rng)
    s = np.where(flips, -1.0, 1.0)
    assert t.log_density(s * x) == t.log_density(x)


def test_match_record_validation():
    m = MatchRecord([1, 2, 3], [4, 5, 6])
    assert m.winners == {1, 2, 3} and m.losers == {4, 5, 6}
    for w, l in [({1}, {1}), (set(), {2}), ({0}, {2})]:
        with pytest.raises(DomainError):
            MatchRecord(w, l)
    with pytest.raises(DimensionError):
        Volleyball([MatchRecord({1}, {7})], 1.0, 5)


# eigenmodel


def test_eigenmodel_simple_values(rng):
    data = random_eigen_data(rng, 8)
    n_obs = int(np.count_nonzero(np.triu(data.ystar, 1)))
    s = EigenmodelState(np.linalg.qr(rng.standard_normal((8, 2)))[0], np.zeros(2), 0.0)
    assert eigenmodel_log_posterior(s, data) == pytest.approx(n_obs * math.log(0.5), rel=1e-14)
    empty = EigenmodelData(np.zeros((6, 6), dtype=int))
    s = EigenmodelState(np.eye(6)[:, :3], np.array([6.0, 0.0, 0.0]), 0.0)
    assert eigenmodel_log_posterior(s, empty) == pytest.approx(-3.0)


def test_eigenmodel_value_against_high_precision_cdf(rng):
    mpmath.mp.dps = 40
    data = random_eigen_data(rng, 12)
    s = random_eigen_state(rng, 12, 2)
    eta = (s.U * s.Lambda) @ s.U.T + s.c
    total = mpmath.mpf(0)
    for i in range(12):
        for j in range(i + 1, 12):
            y = data.ystar[i, j]
            if y != 0:
                total += mpmath.log(mpmath.ncdf(y * eta[i, j]))
    total -= mpmath.mpf(float(s.Lambda @ s.Lambda)) / 24 + mpmath.mpf(s.c) ** 2 / 200
    assert eigenmodel_log_posterior(s, data) == pytest.approx(float(total), rel=1e-8)


def test_eigenmodel_prior_only_gradients():
    empty = EigenmodelData(np.zeros((5, 5), dtype=int))
    s = EigenmodelState(np.eye(5)[:, :2], np.array([2.0, -1.0]), 0.7)
    gu, gl, gc = eigenmodel_gradients(s, empty)
    np.testing.assert_array_equal(gu, 0.0)
    np.testing.assert_allclose(gl, -s.Lambda / 5)
    assert gc == pytest.approx(-0.7 / 100)


def test_eigenmodel_zero_lambda_zero_u_gradient(rng):
    data = random_eigen_data(rng, 9)
    s = random_eigen_state(rng, 9, 3)
    s = EigenmodelState(s.U, np.zeros(3), s.c)
    np.testing.assert_array_equal(eigenmodel_gradients(s, data)[0], 0.0)


def test_eigenmodel_gradients_fd(rng):
    for _ in range(10):
        data = random_eigen_data(rng, 12)
        t = Eigenmodel(data, 2)
        x = random_eigen_state(rng, 12, 2).pack()
        g = t.gradient(x)
        fd = central_diff(t.log_density, x)
        np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-5 * np.abs(fd).max())


def test_eigenmodel_invariances(rng):
    data = random_eigen_data(rng, 10)
    s = random_eigen_state(rng, 10, 3)
    base = eigenmodel_log_posterior(s, data)
    flip = np.array([1.0, -1.0, -1.0])
    assert eigenmodel_log_posterior(EigenmodelState(s.U * flip, s.Lambda, s.c), data) == pytest.approx(base, rel=1e-13)
    perm = [2, 0, 1]
    assert eigenmodel_log_posterior(EigenmodelState(s.U[:, perm], s.Lambda[perm], s.c), data) == pytest.approx(
        base, rel=1e-13)


def test_eigenmodel_pack_roundtrip(rng):
    s = random_eigen_state(rng, 7, 3)
    back = EigenmodelState.unpack(s.pack(), 7, 3)
    np.testing.assert_array_equal(back.U, s.U)
    np.testing.assert_array_equal(back.Lambda, s.Lambda)
    assert back.c == s.c


def test_eigenmodel_data_validation():
    with pytest.raises(DomainError):
        EigenmodelData(np.array([[0, 1], [0, 0]]))
    with pytest.raises(DomainError):
        EigenmodelData(np.array([[1, 0], [0, 0]]))
    with pytest.raises(DomainError):
        EigenmodelData(np.array([[0, 2], [2, 0]]))
    with pytest.raises(DimensionError):
        EigenmodelData(np.zeros((2, 3)))
