import numpy as np
import pytest
from scipy.linalg import solve_triangular

from rcdarma.arma import ArmaModel, run_filter
from rcdarma.detector import noise_covariance
from rcdarma.errors import NumericDomainError
from rcdarma.whitening import (
    WhiteningState, build_factors, covariance, dense_cholesky, extend_factors, forward_substitution,
    initial_factors, whiten, whiten_step,
)

from conftest import random_arma


def test_factor_diagonal_is_sigma():
    f = build_factors(ArmaModel([0.4, 0.1], [0.3], 2.5), 30)
    np.testing.assert_allclose(np.diag(f.cholesky_factor()), 2.5)


def test_extend_appends_reversed_coefficients():
    m = ArmaModel([0.4, 0.1], [0.3, 0.2], 1.0)
    f = build_factors(m, 5)
    np.testing.assert_allclose(f.lower_unit_banded[4], [0, 0, -0.1, -0.4, 1])
    np.testing.assert_allclose(f.ma_banded[4], [0, 0, 0.2, 0.3, 1])
    assert extend_factors(initial_factors(m), m).dimension == 2


def test_factor_covariance_matches_impulse_response_covariance(rng):
    for _ in range(20):
        m = random_arma(rng)
        np.testing.assert_allclose(covariance(build_factors(m, 60)), noise_covariance(m, 60), rtol=1e-10, atol=1e-10)


def test_factor_equals_dense_cholesky(rng):
    for _ in range(10):
        m = random_arma(rng)
        sigma = noise_covariance(m, 80)
        np.testing.assert_allclose(build_factors(m, 80).cholesky_factor(), dense_cholesky(sigma), atol=1e-10)


def test_dense_cholesky_matches_numpy(rng):
    a = rng.standard_normal((30, 30))
    spd = a @ a.T + 30 * np.eye(30)
    np.testing.assert_allclose(dense_cholesky(spd), np.linalg.cholesky(spd), atol=1e-10)


def test_dense_cholesky_rejects_indefinite():
    with pytest.raises(np.linalg.LinAlgError):
        dense_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_forward_substitution(rng):
    lower = np.tril(rng.standard_normal((20, 20))) + 5 * np.eye(20)
    b = rng.standard_normal(20)
    np.testing.assert_allclose(forward_substitution(lower, b), solve_triangular(lower, b, lower=True))


def test_whitening_recovers_driving_noise(rng):
    for _ in range(20):
        m = random_arma(rng)
        eps = rng.standard_normal(300)
        np.testing.assert_allclose(whiten(m, run_filter(m, eps)), eps, atol=1e-9)


def test_whiten_matches_dense_solve(rng):
    m = random_arma(rng, min_p=1, min_q=1)
    z = rng.standard_normal(150)
    chol = build_factors(m, 150).cholesky_factor()
    np.testing.assert_allclose(whiten(m, z), forward_substitution(chol, z), atol=1e-9)


def test_whitening_state_size_is_constant():
    m = ArmaModel([0.5, 0.1, 0.05], [0.2], 1.0)
    state = WhiteningState(m)
    for x in range(100):
        whiten_step(state, float(x))
    assert len(state) == 4


def test_whiten_step_rejects_inf():
    with pytest.raises(NumericDomainError):
        whiten_step(WhiteningState(ArmaModel([0.5])), float("inf"))


def test_white_noise_whitening_scales():
    np.testing.assert_allclose(whiten(ArmaModel([], [], 4.0), [4.0, -8.0]), [1.0, -2.0])
