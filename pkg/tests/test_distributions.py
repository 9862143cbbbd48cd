import numpy as np
import pytest

from chunkreg.distributions import (
    RngStream,
    SpdMatrix,
    cholesky,
    sample_inverse_gamma,
    sample_mvn,
    sample_mvn_precision,
    sample_wishart,
)
from chunkreg.errors import DomainError, FactorizationError, ShapeError

V3 = np.array([[1.0, 0.5, 0.3], [0.5, 2.0, 0.4], [0.3, 0.4, 1.5]])


def test_rng_streams_reproducible_and_independent():
    a = RngStream(42, 0).standard_normal(5)
    b = RngStream(42, 0).standard_normal(5)
    c = RngStream(42, 1).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_rng_seed_range():
    RngStream(2**64 - 1)
    with pytest.raises(DomainError):
        RngStream(-1)


def test_cholesky_names_pivot():
    with pytest.raises(FactorizationError) as ei:
        cholesky(np.array([[4.0, 0.0, 0.0], [0.0, 1.0, 2.0], [0.0, 2.0, 1.0]]))
    assert ei.value.pivot == 2
    with pytest.raises(FactorizationError) as ei:
        cholesky(np.diag([1.0, 0.0]))
    assert ei.value.pivot == 1
    assert "pivot 1" in str(ei.value)


def test_spd_factor_reproduces(rng):
    from conftest import random_spd

    a = random_spd(rng, 6, cond=1e4)
    m = SpdMatrix(a)
    np.testing.assert_allclose(m.chol @ m.chol.T, a, rtol=1e-10, atol=1e-10 * np.abs(a).max())
    np.testing.assert_allclose(m.solve(np.eye(6)) @ a, np.eye(6), atol=1e-10)


def test_spd_rejects_asymmetric():
    with pytest.raises(DomainError):
        SpdMatrix([[1.0, 0.2], [0.3, 1.0]])
    with pytest.raises(ShapeError):
        SpdMatrix(np.ones((2, 3)))


def test_mvn_moments():
    rng = RngStream(101)
    mu0 = np.array([1.0, -2.0, 0.5])
    cov = SpdMatrix.identity(3)
    draws = np.array([sample_mvn(rng, mu0, cov) for _ in range(100_000)])
    assert np.all(np.abs(draws.mean(axis=0) - mu0) < 0.02)
    assert np.all(np.abs(np.cov(draws.T) - np.eye(3)) < 0.05)


def test_mvn_rejects_degenerate():
    with pytest.raises(FactorizationError):
        sample_mvn(RngStream(1), np.zeros(2), np.zeros((2, 2)))
    with pytest.raises(FactorizationError):
        sample_mvn(RngStream(1), np.zeros(2), np.diag([1.0, 0.0]))
    with pytest.raises(ShapeError):
        sample_mvn(RngStream(1), np.zeros(3), np.eye(2))


def test_mvn_deterministic():
    a = [sample_mvn(RngStream(9), np.zeros(3), V3) for _ in range(2)]
    np.testing.assert_array_equal(a[0], a[1])


def test_mvn_affine_property():
    mean = np.array([1.0, 2.0, 3.0])
    got = sample_mvn(RngStream(5), mean, 9.0 * np.eye(3))
    z = RngStream(5).standard_normal(3)
    np.testing.assert_allclose(got, mean + 3.0 * z, rtol=1e-15)


def test_mvn_precision_matches_covariance_route():
    prec = SpdMatrix(np.linalg.inv(V3))
    draws = np.array([sample_mvn_precision(RngStream(3, i), np.zeros(3), prec) for i in range(20_000)])
    assert np.all(np.abs(np.cov(draws.T) - V3) < 0.06)


def test_wishart_mean():
    rng = RngStream(202)
    lam = 5.0
    scale = SpdMatrix(V3)
    acc = np.zeros((3, 3))
    T = 100_000
    for _ in range(T):
        acc += sample_wishart(rng, lam, scale).entries
    np.testing.assert_allclose(acc / T, lam * V3, rtol=0.02)


def test_wishart_univariate_is_chi_square():
    rng = RngStream(303)
    draws = np.array([sample_wishart(rng, 4.5, [[1.0]]).entries[0, 0] for _ in range(100_000)])
    assert abs(draws.mean() - 4.5) < 0.02 * 4.5


def test_wishart_draws_spd_and_factor_cached():
    rng = RngStream(4)
    for _ in range(200):
        w = sample_wishart(rng, 3.0, V3)
        np.testing.assert_allclose(w.chol @ w.chol.T, w.entries, rtol=1e-12, atol=1e-12)
        assert np.all(np.linalg.eigvalsh(w.entries) > 0)
        cholesky(w.entries)


def test_wishart_domain():
    with pytest.raises(DomainError):
        sample_wishart(RngStream(1), 2.0, V3)
    with pytest.raises(FactorizationError):
        sample_wishart(RngStream(1), 3.0, np.diag([1.0, -1.0, 1.0]))


def test_inverse_gamma_mean():
    draws = sample_inverse_gamma(RngStream(77), 3.0, 4.0, size=1_000_000)
    assert abs(draws.mean() - 2.0) < 0.01 * 2.0
    assert np.all(draws > 0)


def test_inverse_gamma_scalar_positive_and_deterministic():
    a = [sample_inverse_gamma(RngStream(8), 0.3, 1e-3) for _ in range(2)]
    assert a[0] == a[1] and a[0] > 0


@pytest.mark.parametrize("shape,rate", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0), (1.0, -2.0)])
def test_inverse_gamma_domain(shape, rate):
    with pytest.raises(DomainError):
        sample_inverse_gamma(RngStream(1), shape, rate)
