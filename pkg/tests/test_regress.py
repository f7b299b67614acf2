"""OLS, classical t-tests, and RMSE scoring."""

import numpy as np
import pytest
import scipy.integrate
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st

from dmlsim.errors import (
    LengthMismatch,
    RankDeficient,
    TooFewObservations,
    ZeroVariance,
)
from dmlsim.regress import CoefficientTest, coefficient_test, ols_fit, rmse


def test_single_column_exact():
    fit = ols_fit(np.array([[1.0], [0.0]]), np.array([3.0, 0.0]))
    assert fit.coefficients[0] == pytest.approx(3.0)


def test_noiseless_recovery():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 4))
    beta = np.array([1.0, -2.0, 0.5, 3.0])
    fit = ols_fit(X, X @ beta)
    np.testing.assert_allclose(fit.coefficients, beta, atol=1e-10)
    assert fit.residual_std == pytest.approx(0.0, abs=1e-10)


def test_matches_normal_equations_oracle():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((50, 3))
    y = rng.standard_normal(50)
    fit = ols_fit(X, y)
    oracle = np.linalg.solve(X.T @ X, X.T @ y)
    np.testing.assert_allclose(fit.coefficients, oracle, atol=1e-8)


def test_fit_identities():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((40, 5))
    y = rng.standard_normal(40)
    fit = ols_fit(X, y, intercept=True)
    np.testing.assert_allclose(fit.fitted + fit.residuals, y, atol=1e-10)
    # residual orthogonality to every included regressor
    assert np.max(np.abs(X.T @ fit.residuals)) < 1e-8 * 40
    assert abs(fit.residuals.sum()) < 1e-8 * 40


def test_rank_and_size_guards():
    rng = np.random.default_rng(3)
    X = rng.standard_normal((10, 3))
    collinear = np.column_stack([X, X[:, 0] + X[:, 1]])
    with pytest.raises(RankDeficient):
        ols_fit(collinear, rng.standard_normal(10))
    with pytest.raises(TooFewObservations):
        ols_fit(rng.standard_normal((3, 5)), rng.standard_normal(3))
    with pytest.raises(LengthMismatch):
        ols_fit(X, rng.standard_normal(9))


@given(scale=st.floats(0.01, 100.0))
@settings(max_examples=30, deadline=None)
def test_scale_equivariance(scale):
    rng = np.random.default_rng(4)
    X = rng.standard_normal((25, 3))
    y = rng.standard_normal(25)
    base = ols_fit(X, y)
    scaled_X = X.copy()
    scaled_X[:, 1] *= scale
    scaled = ols_fit(scaled_X, y)
    assert scaled.coefficients[1] == pytest.approx(
        base.coefficients[1] / scale, rel=1e-9
    )
    np.testing.assert_allclose(scaled.fitted, base.fitted, atol=1e-10)


def test_subset_fit_predicts_in_original_space():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((30, 6))
    y = X[:, 2] * 2.0 + rng.standard_normal(30) * 0.1
    fit = ols_fit(X, y, included_columns=np.array([2, 4]))
    new = rng.standard_normal((5, 6))
    manual = new[:, [2, 4]] @ fit.coefficients
    np.testing.assert_allclose(fit.predict(new), manual, atol=1e-12)


def test_coefficient_test_null_estimate():
    rng = np.random.default_rng(6)
    X = rng.standard_normal((20, 2))
    y = rng.standard_normal(20)
    fit = ols_fit(X, y)
    test = coefficient_test(fit, 0)
    assert isinstance(test, CoefficientTest)
    assert test.t_stat == pytest.approx(test.estimate / test.std_error)
    assert test.rejected_at_5pct == (test.p_value < 0.05)


def test_t_pvalue_against_integration_oracle():
    # n - k = 30 residual df; p-value at |t| = 2.042 should be ~0.05
    rng = np.random.default_rng(7)
    X = rng.standard_normal((32, 2))
    y = rng.standard_normal(32)
    fit = ols_fit(X, y)
    test = coefficient_test(fit, 1)
    df = 30
    const = scipy.special.gamma((df + 1) / 2) / (
        np.sqrt(df * np.pi) * scipy.special.gamma(df / 2)
    )
    density = lambda u: const * (1 + u * u / df) ** (-(df + 1) / 2)
    oracle, _ = scipy.integrate.quad(density, abs(test.t_stat), np.inf)
    assert test.p_value == pytest.approx(2 * oracle, abs=1e-8)
    # and the textbook critical value
    at_crit = 2 * scipy.integrate.quad(density, 2.042, np.inf)[0]
    assert at_crit == pytest.approx(0.05, abs=1e-3)


def test_zero_variance_guard():
    X = np.array([[1.0], [2.0], [3.0]])
    with pytest.raises(ZeroVariance):
        coefficient_test(ols_fit(X, 2.0 * X[:, 0]), 0)


def test_monte_carlo_test_size():
    # true coefficient zero: rejection should track the nominal 5% level
    rng = np.random.default_rng(8)
    rejections = 0
    reps = 10_000
    for _ in range(reps):
        X = rng.standard_normal((12, 2))
        y = 1.5 * X[:, 1] + rng.standard_normal(12)
        rejections += coefficient_test(ols_fit(X, y), 0).rejected_at_5pct
    assert rejections / reps == pytest.approx(0.05, abs=0.01)


def test_frisch_waugh_lovell():
    rng = np.random.default_rng(9)
    X = rng.standard_normal((60, 4))
    d = rng.standard_normal(60) + X[:, 0]
    y = 0.7 * d + X @ np.array([1.0, 0.0, -1.0, 2.0]) + rng.standard_normal(60)
    joint = ols_fit(np.column_stack([d, X]), y)
    e_y = ols_fit(X, y).residuals
    e_d = ols_fit(X, d).residuals
    partial = ols_fit(e_d[:, None], e_y)
    assert partial.coefficients[0] == pytest.approx(
        joint.coefficients[0], rel=1e-8
    )


def test_rmse_values():
    assert rmse([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert rmse([0.0, 0.0], [2.0, -2.0]) == pytest.approx(2.0)
    with pytest.raises(LengthMismatch):
        rmse([1.0], [1.0, 2.0])
