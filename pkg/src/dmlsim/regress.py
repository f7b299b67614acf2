"""Ordinary least squares with classical (homoskedastic) inference."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.stats

from .errors import (
    LengthMismatch,
    RankDeficient,
    TooFewObservations,
    ZeroVariance,
)

_RANK_TOL = 1e-10


@dataclass
class LinearFit:
    """Result of an OLS fit on a subset of columns.

    ``coefficients`` has one entry per included column; the intercept, when
    fitted, is kept separate. ``cov_unscaled`` is (X'X)^-1 over the full
    design (intercept first when present) and feeds standard errors.
    """

    coefficients: np.ndarray
    intercept: float
    has_intercept: bool
    included_columns: np.ndarray
    fitted: np.ndarray
    residuals: np.ndarray
    residual_std: float
    n_obs: int
    n_params: int
    cov_unscaled: np.ndarray

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Apply the fit to new rows of the original feature matrix."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if self.included_columns.size == 0:
            return np.full(x.shape[0], self.intercept)
        return self.intercept + x[:, self.included_columns] @ self.coefficients

    @property
    def support_size(self) -> int:
        return int(self.included_columns.size)


@dataclass
class CoefficientTest:
    """Two-sided t-test of one coefficient against zero."""

    estimate: float
    std_error: float
    t_stat: float
    p_value: float
    rejected_at_5pct: bool


def ols_fit(
    X: np.ndarray,
    y: np.ndarray,
    intercept: bool = False,
    included_columns: np.ndarray | None = None,
) -> LinearFit:
    """Least squares via QR, with rank and sample-size guards.

    ``included_columns`` restricts the fit to a subset of columns of X while
    keeping predictions addressable in the original column space.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n = X.shape[0]
    if y.shape[0] != n:
        raise LengthMismatch(f"X has {n} rows but y has {y.shape[0]}")
    if included_columns is None:
        included_columns = np.arange(X.shape[1])
    else:
        included_columns = np.asarray(included_columns, dtype=int)
    design = X[:, included_columns]
    if intercept:
        design = np.column_stack([np.ones(n), design])
    k = design.shape[1]

    if k == 0:
        residuals = y.copy()
        return LinearFit(
            coefficients=np.empty(0),
            intercept=0.0,
            has_intercept=False,
            included_columns=included_columns,
            fitted=np.zeros(n),
            residuals=residuals,
            residual_std=float(np.sqrt(residuals @ residuals / n)),
            n_obs=n,
            n_params=0,
            cov_unscaled=np.empty((0, 0)),
        )
    if n <= k:
        raise TooFewObservations(f"{k} parameters but only {n} observations")

    q, r = np.linalg.qr(design)
    diag = np.abs(np.diag(r))
    if diag.min() <= _RANK_TOL * max(diag.max(), 1.0):
        raise RankDeficient("design matrix is numerically rank deficient")
    params = scipy.linalg.solve_triangular(r, q.T @ y)
    fitted = design @ params
    residuals = y - fitted
    rss = float(residuals @ residuals)
    r_inv = scipy.linalg.solve_triangular(r, np.eye(k))
    cov_unscaled = r_inv @ r_inv.T

    offset = 1 if intercept else 0
    return LinearFit(
        coefficients=params[offset:],
        intercept=float(params[0]) if intercept else 0.0,
        has_intercept=intercept,
        included_columns=included_columns,
        fitted=fitted,
        residuals=residuals,
        residual_std=float(np.sqrt(rss / (n - k))),
        n_obs=n,
        n_params=k,
        cov_unscaled=cov_unscaled,
    )


def coefficient_test(fit: LinearFit, column: int) -> CoefficientTest:
    """Classical t-test for ``fit.coefficients[column]``."""
    df = fit.n_obs - fit.n_params
    if df < 1:
        raise TooFewObservations("no residual degrees of freedom")
    offset = 1 if fit.has_intercept else 0
    estimate = float(fit.coefficients[column])
    se = fit.residual_std * float(
        np.sqrt(fit.cov_unscaled[column + offset, column + offset])
    )
    if se <= 0 or not np.isfinite(se):
        raise ZeroVariance("standard error underflowed")
    t_stat = estimate / se
    p_value = 2.0 * float(scipy.stats.t.sf(abs(t_stat), df))
    return CoefficientTest(
        estimate=estimate,
        std_error=se,
        t_stat=t_stat,
        p_value=p_value,
        rejected_at_5pct=p_value < 0.05,
    )


def rmse(actual: np.ndarray, predicted: np.ndarray) -> float:
    actual = np.asarray(actual, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if actual.shape != predicted.shape:
        raise LengthMismatch(
            f"lengths differ: {actual.shape} vs {predicted.shape}"
        )
    if actual.size == 0:
        raise LengthMismatch("vectors must be non-empty")
    diff = actual - predicted
    return float(np.sqrt(diff @ diff / diff.size))
