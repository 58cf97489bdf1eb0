import math

import numpy as np
import pytest

from Core.cgp_model import AdjacencyMatrix
from Core.errors import BenchmarkError, ConfigError, DimensionError
from Evaluation import BenchmarkEnv, recovery_report, run_benchmark, timing_profile
from Selection import RuleMode, SelectionRule, default_grid, find_peak, sweep
from Simulation import SbmParams, generate_instance, sbm_params_from_density
from Solver import SolverOptions


def test_recovery_report_counts():
    truth = np.zeros((3, 3))
    truth[0, 1] = 0.5
    truth[1, 2] = -0.4
    estimate = np.zeros((3, 3))
    estimate[0, 1] = 0.3
    estimate[2, 0] = 0.1
    report = recovery_report(AdjacencyMatrix(truth), AdjacencyMatrix(estimate))
    assert report.nbde == 0
    assert report.true_positive == 1 and report.false_positive == 1
    assert report.true_positive_pct == pytest.approx(50.0)
    assert report.false_positive_pct == pytest.approx(50.0)
    assert report.adjacency_mse == pytest.approx((0.2 ** 2 + 0.4 ** 2 + 0.1 ** 2) / 9)


def test_recovery_report_with_empty_graphs():
    empty = AdjacencyMatrix.empty(4)
    dense = AdjacencyMatrix(np.ones((4, 4)) - np.eye(4))
    report = recovery_report(empty, dense)
    assert report.true_positive_pct == 0.0
    assert report.false_positive_pct == pytest.approx(100.0)
    assert report.nbde == 12
    assert report.nbde_pct == pytest.approx(12 / 16 * 100)
    assert recovery_report(dense, empty).false_positive_pct == 0.0


def test_recovery_report_rejects_size_mismatch():
    with pytest.raises(DimensionError):
        recovery_report(AdjacencyMatrix.empty(2), AdjacencyMatrix.empty(3))


def test_benchmark_with_oracle_rule():
    env = BenchmarkEnv(n_nodes=10, n_clusters=2, n_lags=1, n_samples=200)
    sbm = sbm_params_from_density(10, 2, density=0.1)
    result = run_benchmark(env, 2, sbm, SolverOptions(), rules=[SelectionRule(RuleMode.ORACLE)],
                           grid_points=6, max_workers=2)
    assert list(result.per_seed["seed"]) == [0, 1]
    assert result.failures.empty
    oracle = result.summary[result.summary["rule"] == "oracle"]
    assert set(oracle["metric"]) == {"nbde", "nbde_pct", "true_positive_pct", "false_positive_pct",
                                     "adjacency_mse", "lambda1"}
    assert (oracle["n"] == 2).all()
    assert (oracle["iqr"] >= 0).all()
    assert not math.isnan(result.median("oracle", "nbde_pct"))
    assert math.isnan(result.median("bic", "nbde_pct"))


def test_benchmark_checks_environment():
    env = BenchmarkEnv(n_nodes=10, n_clusters=2, n_lags=1, n_samples=200)
    with pytest.raises(ConfigError):
        run_benchmark(env, 1, sbm_params_from_density(12, 2, density=0.1), SolverOptions())
    with pytest.raises(ConfigError):
        run_benchmark(env, 0, sbm_params_from_density(10, 2, density=0.1), SolverOptions())


def test_benchmark_fails_when_most_seeds_fail():
    env = BenchmarkEnv(n_nodes=5, n_clusters=1, n_lags=1, n_samples=50)
    sbm = SbmParams(n_nodes=5, p_in=0.0, p_out=0.0)
    with pytest.raises(BenchmarkError):
        run_benchmark(env, 2, sbm, SolverOptions(), max_workers=1)


def test_timing_profile_single_size_has_undefined_slope():
    profile = timing_profile([10], axis="n", n_clusters=2, n_lags=1, n_samples=100, density=0.1)
    assert len(profile.table) == 1
    assert math.isnan(profile.slope)
    assert profile.table["seconds"].iloc[0] > 0


def test_timing_profile_over_samples():
    profile = timing_profile([100, 200], axis="k", n_nodes=10, n_clusters=2, n_lags=1, density=0.1)
    assert list(profile.table["n_samples"]) == [100, 200]
    assert np.isfinite(profile.slope)
    assert "ratio" in profile.table.columns
    with pytest.raises(ConfigError):
        timing_profile([10], axis="m")


# ---------------------------------------------------------------------------
# 统计验收（CGP_RUN_SLOW=1 时运行）
# ---------------------------------------------------------------------------

def _assert_recovery_bands(result, rule="err_pair"):
    assert result.median(rule, "nbde_pct") <= 1.0
    assert result.median(rule, "true_positive_pct") >= 60.0
    assert result.median(rule, "false_positive_pct") <= 35.0


@pytest.mark.slow
def test_desk_scale_recovery_with_automatic_selection():
    env = BenchmarkEnv(n_nodes=100, n_clusters=5, n_lags=3, n_samples=1040)
    sbm = sbm_params_from_density(100, 5, density=0.02)
    result = run_benchmark(env, 10, sbm, SolverOptions())
    _assert_recovery_bands(result)


@pytest.mark.slow
def test_err_pair_beats_out_of_sample_mse():
    env = BenchmarkEnv(n_nodes=200, n_clusters=5, n_lags=3, n_samples=1040)
    sbm = sbm_params_from_density(200, 5, density=0.02)
    rules = [SelectionRule(RuleMode.ERR_PAIR), SelectionRule(RuleMode.MSE_OUT)]
    result = run_benchmark(env, 5, sbm, SolverOptions(), rules=rules)
    assert result.median("err_pair", "nbde_pct") < result.median("mse_out", "nbde_pct")


@pytest.mark.slow
def test_error_curves_peak_inside_the_grid():
    params = sbm_params_from_density(200, 5, density=0.02, seed=0)
    X = generate_instance(params, 3, 1040).X
    curve = sweep(X, 3, default_grid(X, 3, 0.2), SolverOptions())
    lambdas = curve.lambdas
    assert find_peak(lambdas, curve.values("err")) is not None
    assert find_peak(lambdas, curve.values("err_d")) is not None
    mse_in = curve.values("mse_in")
    assert mse_in[-1] >= mse_in[0]


@pytest.mark.slow
def test_runtime_is_linear_in_samples():
    profile = timing_profile([1040, 2080], axis="k", n_nodes=100, n_clusters=5, n_lags=3, repeats=3)
    assert 1.5 <= profile.table["ratio"].iloc[1] <= 3.0


@pytest.mark.slow
def test_runtime_is_quadratic_in_nodes():
    profile = timing_profile([100, 200], axis="n", n_clusters=5, n_lags=3, n_samples=1040, repeats=3)
    assert 3.0 <= profile.table["ratio"].iloc[1] <= 6.0


@pytest.mark.slow
@pytest.mark.parametrize("sim_lags,fit_lags", [(5, 3), (3, 5)])
def test_recovery_survives_lag_misspecification(sim_lags, fit_lags):
    env = BenchmarkEnv(n_nodes=200, n_clusters=5, n_lags=sim_lags, n_samples=1040)
    sbm = sbm_params_from_density(200, 5, density=0.02)
    result = run_benchmark(env, 10, sbm, SolverOptions(), fit_lags=fit_lags)
    assert result.fit_lags == fit_lags
    _assert_recovery_bands(result)
