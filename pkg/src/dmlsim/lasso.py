"""Lasso via cyclic coordinate descent, plug-in penalty level, post-lasso refit.

Objective: sum of squared errors + lambda * ||beta||_1 on standardized
columns. Soft-thresholding sets excluded coefficients to exactly zero, which
the selection steps downstream rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
import scipy.stats

from .errors import ConstantColumn, DegenerateResponse
from .regress import LinearFit, ols_fit

DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000


@dataclass(frozen=True)
class PenaltyPlan:
    """How the overall penalty level is chosen.

    sigma_init picks the starting noise-scale estimate for the plug-in
    iteration: "top-correlated-ols" regresses the response on the
    n_init_corr most correlated columns (the convention of the cited
    penalty rule), "response-sd" starts from sd(y).
    """

    method: str = "plugin"  # "plugin" | "fixed" | "cv"
    lam: float = 0.0  # used when method == "fixed"
    plugin_c: float = 1.1
    max_sigma_iterations: int = 5
    sigma_init: str = "top-correlated-ols"
    n_init_corr: int = 5
    cv_folds: int = 10

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.plugin_c < 1:
            raise ValueError("plugin_c must be >= 1")
        if self.sigma_init not in ("top-correlated-ols", "response-sd"):
            raise ValueError(f"unknown sigma_init {self.sigma_init!r}")


@dataclass
class LassoFit:
    coefficients: np.ndarray
    support: np.ndarray
    lambda_used: float
    iterations: int
    converged: bool

    @property
    def support_size(self) -> int:
        return int(self.support.size)


def plugin_gamma(n: int, p: int) -> float:
    """Tail-probability budget for the plug-in rule: 0.1 / log(max(p, n))."""
    return 0.1 / np.log(max(p, n))


def standardize_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each column to unit standard deviation (population-n convention).

    Columns are not centered; centering is the caller's concern when an
    intercept is in play.
    """
    X = np.asarray(X, dtype=float)
    scales = X.std(axis=0)
    if np.any(scales <= 0):
        bad = int(np.argmin(scales))
        raise ConstantColumn(f"column {bad} has zero standard deviation")
    return X / scales, scales


@numba.njit(cache=True, nogil=True)
def _cd_sweeps(X, y, lam, beta, tol, max_iter):  # pragma: no cover - jitted
    n, k = X.shape
    resid = y - X @ beta
    col_norm2 = np.empty(k)
    for j in range(k):
        s = 0.0
        for i in range(n):
            s += X[i, j] * X[i, j]
        col_norm2[j] = s
    half_lam = lam / 2.0
    for sweep in range(max_iter):
        max_delta = 0.0
        for j in range(k):
            old = beta[j]
            if old != 0.0:
                for i in range(n):
                    resid[i] += old * X[i, j]
            rho = 0.0
            for i in range(n):
                rho += X[i, j] * resid[i]
            excess = abs(rho) - half_lam
            if excess > 0.0:
                new = np.sign(rho) * excess / col_norm2[j]
                for i in range(n):
                    resid[i] -= new * X[i, j]
            else:
                new = 0.0
            beta[j] = new
            delta = abs(new - old)
            if delta > max_delta:
                max_delta = delta
        if max_delta < tol:
            return sweep + 1, True
    return max_iter, False


def coordinate_descent(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    warm_start: np.ndarray | None = None,
) -> LassoFit:
    """Cyclic soft-thresholding in fixed column order 0..k-1.

    X should be standardized. Non-convergence is reported on the result, not
    raised.
    """
    X = np.asfortranarray(X, dtype=float)
    y = np.ascontiguousarray(y, dtype=float)
    k = X.shape[1]
    beta = np.zeros(k) if warm_start is None else warm_start.astype(float).copy()
    iterations, converged = _cd_sweeps(X, y, float(lam), beta, tol, max_iter)
    support = np.flatnonzero(beta)
    return LassoFit(
        coefficients=beta,
        support=support,
        lambda_used=float(lam),
        iterations=iterations,
        converged=converged,
    )


def kkt_violation(X: np.ndarray, y: np.ndarray, fit: LassoFit) -> float:
    """Max violation of the subgradient conditions; ~0 for a true optimum."""
    grad = 2.0 * (np.asarray(X).T @ (y - X @ fit.coefficients))
    on = np.zeros(fit.coefficients.size, dtype=bool)
    on[fit.support] = True
    worst = 0.0
    if on.any():
        worst = float(
            np.max(np.abs(grad[on] - fit.lambda_used * np.sign(fit.coefficients[on])))
        )
    if (~on).any():
        worst = max(worst, float(np.max(np.abs(grad[~on]) - fit.lambda_used)))
    return worst


def _lambda_from_sigma(sigma: float, n: int, p: int, plugin_c: float) -> float:
    gamma = plugin_gamma(n, p)
    quantile = scipy.stats.norm.ppf(1.0 - gamma / (2.0 * p))
    return 2.0 * plugin_c * sigma * np.sqrt(n) * quantile


def _refit_sigma(X: np.ndarray, y: np.ndarray, columns: np.ndarray) -> float:
    """Noise scale from an OLS refit on the given columns, df-corrected."""
    fit = ols_fit(X, y, included_columns=columns)
    resid = fit.residuals
    df = max(y.size - columns.size - 1, 1)
    return float(np.sqrt(resid @ resid / df))


def plugin_lambda(
    X: np.ndarray,
    y: np.ndarray,
    plan: PenaltyPlan = PenaltyPlan(),
    tol: float = DEFAULT_TOL,
) -> float:
    """Data-dependent penalty with an iterated noise-scale estimate.

    The initial sigma comes from either sd(y) or an OLS refit on the
    n_init_corr most response-correlated columns, per plan.sigma_init.
    Each round fits the lasso at the current level and re-estimates sigma
    from an unpenalized refit on the selected support, stopping after
    max_sigma_iterations rounds or when the relative change in sigma drops
    below 1e-4. X must be standardized.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if float(np.std(y)) <= 0:
        raise DegenerateResponse("response has zero variance")
    if plan.sigma_init == "top-correlated-ols":
        top = np.argsort(np.abs(X.T @ y))[-min(plan.n_init_corr, p) :]
        sigma = _refit_sigma(X, y, np.sort(top))
    else:
        sigma = float(np.std(y))
    lam = _lambda_from_sigma(sigma, n, p, plan.plugin_c)
    beta = None
    for _ in range(plan.max_sigma_iterations):
        fit = coordinate_descent(X, y, lam, tol=tol, warm_start=beta)
        beta = fit.coefficients
        new_sigma = _refit_sigma(X, y, fit.support)
        if new_sigma <= 0:
            break
        lam = _lambda_from_sigma(new_sigma, n, p, plan.plugin_c)
        if abs(new_sigma - sigma) < 1e-4 * sigma:
            break
        sigma = new_sigma
    return float(lam)


def cv_lambda(
    X: np.ndarray,
    y: np.ndarray,
    plan: PenaltyPlan = PenaltyPlan(method="cv"),
    n_grid: int = 50,
) -> float:
    """Minimum-MSE K-fold cross-validated penalty on a log-spaced grid.

    Folds are contiguous blocks, so the choice is deterministic in the data.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    lam_max = 2.0 * float(np.max(np.abs(X.T @ y)))
    if lam_max <= 0:
        raise DegenerateResponse("response has zero variance")
    grid = lam_max * np.logspace(0, -3, n_grid)
    folds = np.array_split(np.arange(n), min(plan.cv_folds, n))
    mse = np.zeros(n_grid)
    for hold in folds:
        keep = np.setdiff1d(np.arange(n), hold)
        beta = None
        for g, lam in enumerate(grid):
            fit = coordinate_descent(X[keep], y[keep], lam, warm_start=beta)
            beta = fit.coefficients
            err = y[hold] - X[hold] @ beta
            mse[g] += float(err @ err)
    return float(grid[int(np.argmin(mse))])


def resolve_lambda(X: np.ndarray, y: np.ndarray, plan: PenaltyPlan) -> float:
    if plan.method == "plugin":
        return plugin_lambda(X, y, plan)
    if plan.method == "fixed":
        return plan.lam
    if plan.method == "cv":
        return cv_lambda(X, y, plan)
    raise ValueError(f"unknown penalty method {plan.method!r}")


def lasso_select(
    X: np.ndarray,
    y: np.ndarray,
    plan: PenaltyPlan = PenaltyPlan(),
    intercept: bool = False,
) -> LassoFit:
    """Standardize, pick the penalty level per plan, and fit.

    With an intercept, X columns and y are centered first and the reported
    coefficients stay on the standardized scale; only the support is meant
    for downstream use.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if intercept:
        X = X - X.mean(axis=0)
        y = y - y.mean()
    Xs, _ = standardize_columns(X)
    lam = resolve_lambda(Xs, y, plan)
    return coordinate_descent(Xs, y, lam)


def post_lasso(
    X: np.ndarray,
    y: np.ndarray,
    plan: PenaltyPlan = PenaltyPlan(),
    intercept: bool = False,
) -> LinearFit:
    """Lasso for selection, then an unpenalized OLS refit on the support.

    An empty support yields an intercept-only fit when the intercept is
    enabled, otherwise an all-zero prediction.
    """
    selection = lasso_select(X, y, plan, intercept=intercept)
    if selection.support.size == 0 and not intercept:
        return ols_fit(X, y, intercept=False, included_columns=np.empty(0, dtype=int))
    return ols_fit(X, y, intercept=intercept, included_columns=selection.support)
