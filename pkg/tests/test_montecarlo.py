"""Replication orchestration, aggregation, and histogram binning."""

import numpy as np
import pytest
import scipy.stats

from dmlsim.dgp import paper_scenario, with_overrides
from dmlsim.errors import EmptyInput, TooFew
from dmlsim.estimators import forecast_ols, infer_naive
from dmlsim.dgp import generate
from dmlsim.montecarlo import (
    ALL_PIPELINES,
    aggregate_from_vectors,
    histogram,
    run_study,
    sd_of_estimates,
)


@pytest.fixture(scope="module")
def tiny_cfg():
    return with_overrides(paper_scenario("base48"), replications=20)


def test_sd_of_estimates():
    assert sd_of_estimates(np.array([1.0, 1.0, 1.0])) == 0.0
    assert sd_of_estimates(np.array([0.0, 2.0])) == pytest.approx(np.sqrt(2))
    with pytest.raises(TooFew):
        sd_of_estimates(np.array([1.0]))


def test_single_replication_matches_direct_call(tiny_cfg):
    cfg = with_overrides(tiny_cfg, replications=1)
    report = run_study(cfg)
    data = generate(cfg, 0)
    direct_f = forecast_ols(data, cfg)
    direct_i = infer_naive(data, cfg)
    row = report.forecast_rows["forecast_ols"]
    assert row.mean_in_sample_rmse == pytest.approx(direct_f.in_sample_rmse)
    assert row.mean_oos_rmse == pytest.approx(direct_f.out_of_sample_rmse)
    inf = report.inference_rows["infer_naive"]
    assert inf.mean_estimate == pytest.approx(direct_i.alpha_hat)


def test_parallelism_is_bit_identical(tiny_cfg):
    serial = run_study(tiny_cfg, parallelism=1)
    threaded = run_study(tiny_cfg, parallelism=8)
    for key, vec in serial.per_replication.items():
        np.testing.assert_array_equal(vec, threaded.per_replication[key])
    for name in ALL_PIPELINES:
        if name in serial.inference_rows:
            assert (
                serial.inference_rows[name].mean_estimate
                == threaded.inference_rows[name].mean_estimate
            )


def test_aggregation_conventions(tiny_cfg):
    report = run_study(tiny_cfg)
    for row in report.inference_rows.values():
        alphas = report.per_replication[f"{row.method}.alpha_hat"]
        rejected = report.per_replication[f"{row.method}.rejected"]
        assert row.rejection_rate == pytest.approx(np.mean(rejected))
        expected_t = np.mean(alphas) / (np.std(alphas, ddof=1) / np.sqrt(alphas.size))
        assert row.t_stat == pytest.approx(expected_t)
        assert row.n_used + row.n_failed == tiny_cfg.replications


def test_failures_are_excluded_and_counted():
    # 40 training rows cannot support the 41-regressor OLS; post-lasso is fine
    cfg = with_overrides(
        paper_scenario("base48"), n_train=40, n_holdout=12, replications=5
    )
    report = run_study(cfg)
    ols_row = report.forecast_rows["forecast_ols"]
    assert ols_row.n_failed == 5 and ols_row.n_used == 0
    assert len(report.failures["forecast_ols"]) == 5
    assert report.forecast_rows["forecast_post_lasso"].n_used == 5


def test_subset_of_pipelines(tiny_cfg):
    report = run_study(tiny_cfg, pipelines=("forecast_post_lasso",))
    assert set(report.forecast_rows) == {"forecast_post_lasso"}
    assert not report.inference_rows
    with pytest.raises(ValueError):
        run_study(tiny_cfg, pipelines=("nonsense",))


def test_aggregate_from_vectors_roundtrip(tiny_cfg):
    report = run_study(tiny_cfg)
    rebuilt = aggregate_from_vectors(tiny_cfg, report.per_replication)
    for name, row in report.inference_rows.items():
        again = rebuilt.inference_rows[name]
        assert again.mean_estimate == pytest.approx(row.mean_estimate)
        assert again.std_dev == pytest.approx(row.std_dev)
        assert again.rejection_rate == pytest.approx(row.rejection_rate)
    for name, row in report.forecast_rows.items():
        again = rebuilt.forecast_rows[name]
        assert again.mean_oos_rmse == pytest.approx(row.mean_oos_rmse)


def test_histogram_constant_vector():
    hist = histogram(np.full(10, 3.0), bins=5)
    assert hist.counts.sum() == 10
    assert (hist.counts > 0).sum() == 1


def test_histogram_normal_poisson_oracle():
    # bin counts fluctuate around the normal-density mass like Poisson draws
    draws = np.random.default_rng(0).standard_normal(100_000)
    hist = histogram(draws, bins=50)
    for left, right, count in zip(hist.edges[:-1], hist.edges[1:], hist.counts):
        mass = scipy.stats.norm.cdf(right) - scipy.stats.norm.cdf(left)
        expected = mass * draws.size
        assert abs(count - expected) < 3.0 * np.sqrt(max(expected, 1.0))


def test_histogram_overlay_shape():
    draws = np.random.default_rng(1).standard_normal(500)
    hist = histogram(draws, bins=10)
    assert hist.overlay_x.size == 200
    assert hist.overlay_y.max() == pytest.approx(
        scipy.stats.norm.pdf(hist.mean, hist.mean, hist.sd), rel=0.01
    )
    with pytest.raises(EmptyInput):
        histogram(np.array([]), bins=5)
    with pytest.raises(ValueError):
        histogram(draws, bins=1)
