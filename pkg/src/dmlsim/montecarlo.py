"""Replication orchestration and cross-replication aggregation.

Each replication derives its own random stream from (master_seed, rep),
so results are bit-identical for any degree of parallelism; workers only
fill slots of a pre-indexed list.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.stats

from . import estimators
from .dgp import ScenarioConfig, generate
from .errors import DmlSimError, EmptyInput, TooFew

ALL_PIPELINES = (
    "forecast_ols",
    "forecast_post_lasso",
    "infer_naive",
    "infer_partialling_out",
)

FORECAST_PIPELINES = ("forecast_ols", "forecast_post_lasso")
INFERENCE_PIPELINES = ("infer_naive", "infer_partialling_out")


@dataclass
class ForecastRow:
    method: str
    mean_in_sample_rmse: float
    mean_oos_rmse: float
    mean_support_size: float | None
    n_used: int
    n_failed: int


@dataclass
class InferenceRow:
    method: str
    mean_estimate: float
    std_dev: float
    t_stat: float  # of the mean across replications
    p_value: float
    rejection_rate: float
    n_used: int
    n_failed: int


@dataclass
class AggregateReport:
    scenario: ScenarioConfig
    forecast_rows: dict[str, ForecastRow]
    inference_rows: dict[str, InferenceRow]
    per_replication: dict[str, np.ndarray]
    failures: dict[str, list[tuple[int, str]]]
    runtime_seconds: float


@dataclass
class Histogram:
    edges: np.ndarray  # bins + 1 entries
    counts: np.ndarray
    overlay_x: np.ndarray  # 200 points spanning the data range
    overlay_y: np.ndarray  # normal density with the sample's mean / sd
    mean: float
    sd: float


def sd_of_estimates(values: np.ndarray) -> float:
    """Sample standard deviation (divisor R - 1)."""
    values = np.asarray(values, dtype=float)
    if values.size < 2:
        raise TooFew("need at least two values")
    return float(np.std(values, ddof=1))


def histogram(values: np.ndarray, bins: int) -> Histogram:
    """Equal-width bins over [min, max] plus a fitted normal overlay."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise EmptyInput("cannot histogram an empty vector")
    if bins < 2:
        raise ValueError("bins must be >= 2")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:  # degenerate single-bin case
        hi = lo + 1.0
        edges = np.linspace(lo - 0.5, lo + 0.5, bins + 1)
    else:
        edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(values, bins=edges)
    mean = float(values.mean())
    sd = float(values.std(ddof=1)) if values.size > 1 else 0.0
    overlay_x = np.linspace(edges[0], edges[-1], 200)
    if sd > 0:
        overlay_y = scipy.stats.norm.pdf(overlay_x, loc=mean, scale=sd)
    else:
        overlay_y = np.zeros_like(overlay_x)
    return Histogram(
        edges=edges,
        counts=counts,
        overlay_x=overlay_x,
        overlay_y=overlay_y,
        mean=mean,
        sd=sd,
    )


def aggregate_from_vectors(
    config: ScenarioConfig,
    per_rep: dict[str, np.ndarray],
    runtime_seconds: float = 0.0,
) -> AggregateReport:
    """Rebuild an AggregateReport from stored per-replication vectors.

    Used when replaying a study from its per-replication CSV; failed
    replications appear as NaN rows and are excluded from the averages the
    same way run_study excludes them.
    """
    forecast_rows: dict[str, ForecastRow] = {}
    inference_rows: dict[str, InferenceRow] = {}
    failures: dict[str, list[tuple[int, str]]] = {}
    for name in ALL_PIPELINES:
        if name in FORECAST_PIPELINES:
            key = f"{name}.in_sample_rmse"
            if key not in per_rep:
                continue
            in_rmse = per_rep[key]
            oos = per_rep[f"{name}.oos_rmse"]
            ok = np.isfinite(in_rmse)
            n_used, n_failed = int(ok.sum()), int((~ok).sum())
            failures[name] = [(int(r), "replayed failure") for r in np.flatnonzero(~ok)]
            support = per_rep.get(f"{name}.support_size")
            forecast_rows[name] = ForecastRow(
                method=name,
                mean_in_sample_rmse=float(in_rmse[ok].mean()) if n_used else np.nan,
                mean_oos_rmse=float(oos[ok].mean()) if n_used else np.nan,
                mean_support_size=(
                    float(np.mean(support[ok])) if support is not None and n_used else None
                ),
                n_used=n_used,
                n_failed=n_failed,
            )
        else:
            key = f"{name}.alpha_hat"
            if key not in per_rep:
                continue
            alphas_all = per_rep[key]
            rejected = per_rep[f"{name}.rejected"]
            ok = np.isfinite(alphas_all)
            n_used, n_failed = int(ok.sum()), int((~ok).sum())
            failures[name] = [(int(r), "replayed failure") for r in np.flatnonzero(~ok)]
            alphas = alphas_all[ok]
            mean_est = float(alphas.mean()) if n_used else np.nan
            sd_est = sd_of_estimates(alphas) if n_used >= 2 else np.nan
            if n_used >= 2 and sd_est > 0:
                t_of_mean = mean_est / (sd_est / np.sqrt(n_used))
                p_of_mean = 2.0 * float(scipy.stats.t.sf(abs(t_of_mean), n_used - 1))
            else:
                t_of_mean, p_of_mean = np.nan, np.nan
            inference_rows[name] = InferenceRow(
                method=name,
                mean_estimate=mean_est,
                std_dev=sd_est,
                t_stat=float(t_of_mean),
                p_value=p_of_mean,
                rejection_rate=float(rejected[ok].mean()) if n_used else np.nan,
                n_used=n_used,
                n_failed=n_failed,
            )
    return AggregateReport(
        scenario=config,
        forecast_rows=forecast_rows,
        inference_rows=inference_rows,
        per_replication=dict(per_rep),
        failures=failures,
        runtime_seconds=runtime_seconds,
    )


def _run_replication(config: ScenarioConfig, rep: int, pipelines) -> dict:
    data = generate(config, rep)
    record: dict = {}
    for name in pipelines:
        try:
            if name == "forecast_ols":
                m = estimators.forecast_ols(data, config)
                record[name] = (m.in_sample_rmse, m.out_of_sample_rmse, np.nan)
            elif name == "forecast_post_lasso":
                m = estimators.forecast_post_lasso(data, config)
                record[name] = (
                    m.in_sample_rmse,
                    m.out_of_sample_rmse,
                    float(m.support_size),
                )
            elif name == "infer_naive":
                e = estimators.infer_naive(data, config)
                record[name] = (e.alpha_hat, e.std_error, e.p_value, e.rejected_at_5pct)
            elif name == "infer_partialling_out":
                e = estimators.infer_partialling_out(data, config)
                record[name] = (e.alpha_hat, e.std_error, e.p_value, e.rejected_at_5pct)
            else:
                raise ValueError(f"unknown pipeline {name!r}")
        except DmlSimError as exc:
            record[name] = exc
    return record


def run_study(
    config: ScenarioConfig,
    pipelines=ALL_PIPELINES,
    parallelism: int = 1,
) -> AggregateReport:
    """Run every requested pipeline over R seeded replications and aggregate.

    Replications that fail for one method are excluded from that method's
    averages and counted in the failure list; the others are unaffected.
    """
    config.validate()
    for name in pipelines:
        if name not in ALL_PIPELINES:
            raise ValueError(f"unknown pipeline {name!r}")
    start = time.perf_counter()
    reps = range(config.replications)
    if parallelism <= 1:
        records = [_run_replication(config, r, pipelines) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(
                pool.map(lambda r: _run_replication(config, r, pipelines), reps)
            )

    per_rep: dict[str, np.ndarray] = {}
    failures: dict[str, list[tuple[int, str]]] = {name: [] for name in pipelines}
    forecast_rows: dict[str, ForecastRow] = {}
    inference_rows: dict[str, InferenceRow] = {}

    for name in pipelines:
        ok = np.array(
            [not isinstance(rec[name], DmlSimError) for rec in records], dtype=bool
        )
        for rep, rec in enumerate(records):
            if not ok[rep]:
                failures[name].append((rep, str(rec[name])))
        n_used = int(ok.sum())
        n_failed = int((~ok).sum())

        if name in FORECAST_PIPELINES:
            vals = np.full((config.replications, 3), np.nan)
            for rep, rec in enumerate(records):
                if ok[rep]:
                    vals[rep] = rec[name]
            per_rep[f"{name}.in_sample_rmse"] = vals[:, 0]
            per_rep[f"{name}.oos_rmse"] = vals[:, 1]
            mean_support = None
            if name == "forecast_post_lasso":
                per_rep[f"{name}.support_size"] = vals[:, 2]
                mean_support = float(np.nanmean(vals[ok, 2])) if n_used else np.nan
            forecast_rows[name] = ForecastRow(
                method=name,
                mean_in_sample_rmse=float(np.mean(vals[ok, 0])) if n_used else np.nan,
                mean_oos_rmse=float(np.mean(vals[ok, 1])) if n_used else np.nan,
                mean_support_size=mean_support,
                n_used=n_used,
                n_failed=n_failed,
            )
        else:
            vals = np.full((config.replications, 4), np.nan)
            for rep, rec in enumerate(records):
                if ok[rep]:
                    est = rec[name]
                    vals[rep] = (est[0], est[1], est[2], 1.0 if est[3] else 0.0)
            per_rep[f"{name}.alpha_hat"] = vals[:, 0]
            per_rep[f"{name}.std_error"] = vals[:, 1]
            per_rep[f"{name}.p_value"] = vals[:, 2]
            per_rep[f"{name}.rejected"] = vals[:, 3]
            alphas = vals[ok, 0]
            mean_est = float(alphas.mean()) if n_used else np.nan
            sd_est = sd_of_estimates(alphas) if n_used >= 2 else np.nan
            if n_used >= 2 and sd_est > 0:
                t_of_mean = mean_est / (sd_est / np.sqrt(n_used))
                p_of_mean = 2.0 * float(scipy.stats.t.sf(abs(t_of_mean), n_used - 1))
            else:
                t_of_mean, p_of_mean = np.nan, np.nan
            inference_rows[name] = InferenceRow(
                method=name,
                mean_estimate=mean_est,
                std_dev=sd_est,
                t_stat=float(t_of_mean),
                p_value=p_of_mean,
                rejection_rate=float(vals[ok, 3].mean()) if n_used else np.nan,
                n_used=n_used,
                n_failed=n_failed,
            )

    return AggregateReport(
        scenario=config,
        forecast_rows=forecast_rows,
        inference_rows=inference_rows,
        per_replication=per_rep,
        failures=failures,
        runtime_seconds=time.perf_counter() - start,
    )
