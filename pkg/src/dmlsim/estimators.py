"""The four study pipelines applied to one simulated dataset.

Forecasting: plain OLS vs post-lasso, fit on the training window and scored
by in-sample and holdout RMSE. Inference on the promotion effect: the naive
post-selection refit vs the partialling-out (residuals-on-residuals)
estimator. The inference regressions pool every observed row; only the naive
pipeline's control selection is inherited from the training-window lasso.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.stats

from .dgp import ScenarioConfig, SimDataset
from .errors import DegenerateResiduals, TooFewObservations
from .lasso import PenaltyPlan, lasso_select, post_lasso
from .regress import coefficient_test, ols_fit, rmse


@dataclass
class ForecastMetrics:
    method: str  # "ols" | "post_lasso"
    in_sample_rmse: float
    out_of_sample_rmse: float
    support_size: int | None = None  # selected x-features, excluding d


@dataclass
class InferenceEstimate:
    method: str  # "naive" | "partialling_out"
    alpha_hat: float
    std_error: float
    t_stat: float
    p_value: float
    rejected_at_5pct: bool
    first_stage_support_sizes: tuple[int, int] = (0, 0)


def _plan(config: ScenarioConfig) -> PenaltyPlan:
    return PenaltyPlan(method=config.penalty_method)


def _design(data: SimDataset) -> np.ndarray:
    # promotion first, then the 40 candidate features
    return np.column_stack([data.d, data.x])


def forecast_ols(data: SimDataset, config: ScenarioConfig) -> ForecastMetrics:
    """OLS of sales on [d, x]; fails in the n <= #regressors regime."""
    full = _design(data)
    train, hold = data.train_rows, data.holdout_rows
    k = full.shape[1] + (1 if config.intercept else 0)
    if train.size <= k:
        raise TooFewObservations(
            f"OLS needs more than {k} training rows, got {train.size}"
        )
    fit = ols_fit(full[train], data.y[train], intercept=config.intercept)
    return ForecastMetrics(
        method="ols",
        in_sample_rmse=rmse(data.y[train], fit.fitted),
        out_of_sample_rmse=rmse(data.y[hold], fit.predict(full[hold])),
    )


def forecast_post_lasso(data: SimDataset, config: ScenarioConfig) -> ForecastMetrics:
    """Plug-in-penalized lasso selection on [d, x], then an OLS refit."""
    full = _design(data)
    train, hold = data.train_rows, data.holdout_rows
    fit = post_lasso(
        full[train], data.y[train], _plan(config), intercept=config.intercept
    )
    selected_x = int(np.sum(fit.included_columns > 0))  # column 0 is d
    return ForecastMetrics(
        method="post_lasso",
        in_sample_rmse=rmse(data.y[train], fit.fitted),
        out_of_sample_rmse=rmse(data.y[hold], fit.predict(full[hold])),
        support_size=selected_x,
    )


def infer_naive(data: SimDataset, config: ScenarioConfig) -> InferenceEstimate:
    """Lasso-select controls for sales, force d in, read off its OLS t-test.

    Selection reuses the training-window lasso a forecaster would have run;
    the refit then pools all rows. By default d is excluded from the
    selection regression and then forced into the refit; set
    naive_selection_includes_d to let it compete in step 1 as well (it is
    forced into step 2 either way).
    """
    train = data.train_rows
    y_train = data.y[train]
    if config.naive_selection_includes_d:
        full = _design(data)[train]
        selection = lasso_select(
            full, y_train, _plan(config), intercept=config.intercept
        )
        selected = selection.support[selection.support > 0] - 1
    else:
        selection = lasso_select(
            data.x[train], y_train, _plan(config), intercept=config.intercept
        )
        selected = selection.support
    design = np.column_stack([data.d, data.x[:, selected]])
    fit = ols_fit(design, data.y, intercept=config.intercept)
    test = coefficient_test(fit, 0)
    return InferenceEstimate(
        method="naive",
        alpha_hat=test.estimate,
        std_error=test.std_error,
        t_stat=test.t_stat,
        p_value=test.p_value,
        rejected_at_5pct=test.rejected_at_5pct,
        first_stage_support_sizes=(int(selected.size), 0),
    )


def _first_stage_residuals(
    x: np.ndarray,
    target: np.ndarray,
    plan: PenaltyPlan,
    intercept: bool,
    method: str,
) -> tuple[np.ndarray, int]:
    if method == "post_lasso":
        fit = post_lasso(x, target, plan, intercept=intercept)
    elif method == "ols":
        fit = ols_fit(x, target, intercept=intercept)
    else:
        raise ValueError(f"unknown first-stage method {method!r}")
    return fit.residuals, fit.support_size


def infer_partialling_out(
    data: SimDataset,
    config: ScenarioConfig,
    cross_fit_folds: int | None = None,
    first_stage: str = "post_lasso",
) -> InferenceEstimate:
    """Residuals-on-residuals estimate of the promotion effect.

    Both sales and promotion are residualized against the features with the
    chosen first stage; the final no-intercept OLS of e_y on e_d is tested
    with n-1 degrees of freedom, where n counts every observed row (this
    estimator sees no train/holdout split). With cross_fit_folds=K, each
    fold's residuals come from first stages trained on the other K-1 folds.
    """
    if cross_fit_folds is None:
        cross_fit_folds = config.cross_fit_folds
    x, d, y = data.x, data.d, data.y
    plan = _plan(config)
    n = y.size

    if cross_fit_folds is None:
        e_y, size_y = _first_stage_residuals(x, y, plan, config.intercept, first_stage)
        e_d, size_d = _first_stage_residuals(x, d, plan, config.intercept, first_stage)
    else:
        e_y = np.empty(n)
        e_d = np.empty(n)
        sizes_y, sizes_d = [], []
        for hold in np.array_split(np.arange(n), cross_fit_folds):
            keep = np.setdiff1d(np.arange(n), hold)
            for target, out, sizes in ((y, e_y, sizes_y), (d, e_d, sizes_d)):
                if first_stage == "post_lasso":
                    fit = post_lasso(x[keep], target[keep], plan, intercept=config.intercept)
                else:
                    fit = ols_fit(x[keep], target[keep], intercept=config.intercept)
                out[hold] = target[hold] - fit.predict(x[hold])
                sizes.append(fit.support_size)
        size_y = int(round(float(np.mean(sizes_y))))
        size_d = int(round(float(np.mean(sizes_d))))

    denom = float(e_d @ e_d)
    if denom <= 1e-12:
        raise DegenerateResiduals("treatment residuals have zero variance")
    alpha_hat = float(e_d @ e_y) / denom
    resid = e_y - alpha_hat * e_d
    df = n - 1
    sigma2 = float(resid @ resid) / df
    se = float(np.sqrt(sigma2 / denom))
    t_stat = alpha_hat / se
    p_value = 2.0 * float(scipy.stats.t.sf(abs(t_stat), df))
    return InferenceEstimate(
        method="partialling_out",
        alpha_hat=alpha_hat,
        std_error=se,
        t_stat=t_stat,
        p_value=p_value,
        rejected_at_5pct=p_value < 0.05,
        first_stage_support_sizes=(size_y, size_d),
    )
