"""Random stream derivation and correlated-feature sampling."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmlsim.errors import NotPositiveDefinite
from dmlsim.rng import (
    CovarianceSpec,
    SeedSpec,
    cholesky_factor,
    derive_stream,
    sample_mvn_rows,
    sample_standard_normal,
)


def test_same_seed_same_draws():
    a = derive_stream(SeedSpec(7, 0)).standard_normal(100)
    b = derive_stream(SeedSpec(7, 0)).standard_normal(100)
    np.testing.assert_array_equal(a, b)


def test_different_replication_differs():
    a = derive_stream(SeedSpec(7, 0)).standard_normal(1)
    b = derive_stream(SeedSpec(7, 1)).standard_normal(1)
    assert a[0] != b[0]


@given(seed=st.integers(0, 2**64 - 1), rep=st.integers(0, 10_000))
@settings(max_examples=50, deadline=None)
def test_streams_are_pure_functions_of_key(seed, rep):
    a = derive_stream(SeedSpec(seed, rep)).standard_normal(5)
    b = derive_stream(SeedSpec(seed, rep)).standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_seedspec_rejects_bad_keys():
    with pytest.raises(ValueError):
        SeedSpec(-1, 0)
    with pytest.raises(ValueError):
        SeedSpec(2**64, 0)
    with pytest.raises(ValueError):
        SeedSpec(0, -1)


def test_standard_normal_moments():
    # CLT bound for the mean, chi-square tail bound for the variance
    draws = sample_standard_normal(derive_stream(SeedSpec(11, 0)), 100_000)
    assert abs(draws.mean()) < 0.02
    assert abs(draws.var() - 1.0) < 0.03


def test_standard_normal_single_draw():
    value = sample_standard_normal(derive_stream(SeedSpec(3, 2)), 1)
    assert value.shape == (1,)
    assert np.isfinite(value[0])


def test_cholesky_p1_is_identity():
    np.testing.assert_allclose(cholesky_factor(CovarianceSpec(1, 0.7)), [[1.0]])


def test_cholesky_p2_hand_values():
    # hand Cholesky of [[1, 0.3], [0.3, 1]]
    factor = cholesky_factor(CovarianceSpec(2, 0.3))
    expected = np.array([[1.0, 0.0], [0.3, np.sqrt(0.91)]])
    np.testing.assert_allclose(factor, expected, atol=1e-12)


def test_cholesky_roundtrip_p40():
    cov = CovarianceSpec(40, 0.3)
    factor = cholesky_factor(cov)
    assert np.max(np.abs(factor @ factor.T - cov.matrix())) < 1e-10
    assert np.all(np.diag(factor) > 0)
    assert np.max(np.abs(np.triu(factor, 1))) == 0.0


@pytest.mark.parametrize("p", [2, 17, 128, 512])
@pytest.mark.parametrize("c", [-0.95, -0.3, 0.0, 0.5, 0.95])
def test_cholesky_roundtrip_sweep(p, c):
    cov = CovarianceSpec(p, c)
    factor = cholesky_factor(cov)
    assert np.max(np.abs(factor @ factor.T - cov.matrix())) < 1e-10


@pytest.mark.parametrize("c", [1.0, -1.0, 1.5])
def test_cholesky_rejects_invalid_c(c):
    with pytest.raises(NotPositiveDefinite):
        cholesky_factor(CovarianceSpec(3, c))


def test_mvn_neighbor_correlation():
    rows = sample_mvn_rows(derive_stream(SeedSpec(5, 0)), CovarianceSpec(2, 0.3), 200_000)
    corr = np.corrcoef(rows.T)
    assert abs(corr[0, 1] - 0.3) < 0.01


def test_mvn_lag3_correlation():
    # three steps apart decays to 0.3 ** 3 = 0.027
    rows = sample_mvn_rows(derive_stream(SeedSpec(5, 1)), CovarianceSpec(5, 0.3), 200_000)
    corr = np.corrcoef(rows.T)
    assert abs(corr[0, 3] - 0.027) < 0.01


def test_mvn_independent_when_c_zero():
    rows = sample_mvn_rows(derive_stream(SeedSpec(5, 2)), CovarianceSpec(4, 0.0), 200_000)
    corr = np.corrcoef(rows.T)
    off = corr[~np.eye(4, dtype=bool)]
    assert np.max(np.abs(off)) < 0.01


def test_empirical_covariance_consistency():
    n = 100_000
    cov = CovarianceSpec(6, 0.3)
    rows = sample_mvn_rows(derive_stream(SeedSpec(9, 0)), cov, n)
    emp = rows.T @ rows / n
    assert np.max(np.abs(emp - cov.matrix())) < 5.0 / np.sqrt(n)
