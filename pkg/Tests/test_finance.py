import math

import numpy as np
import pytest

from Core.cgp_model import TimeSeries
from Core.errors import ConfigError, InsufficientDataError
from Selection import RuleMode, SelectionRule
from Simulation import generate_instance, sbm_params_from_density
from Solver import SolverOptions
from Tools.Finance import PriceOptions, build_price_options, ewma_weights, realized_variance, rolling_analysis
from Tools.Finance.rolling import ROLLING_COLUMNS


def test_ewma_weights_are_normalized():
    weights = ewma_weights(0.9, 5)
    assert weights.sum() == pytest.approx(1.0)
    assert weights[1] / weights[0] == pytest.approx(0.9)


def test_constant_returns_give_constant_variance():
    X = TimeSeries(np.full((2, 50), 0.1))
    result = realized_variance(X, decay=0.99, window=10)
    assert np.all(np.isnan(result.rv[:, :9]))
    np.testing.assert_allclose(result.rv[:, 9:], 0.01, rtol=1e-12)
    np.testing.assert_allclose(result.market_log_rv[9:], math.log(0.01), rtol=1e-12)
    assert not result.defined[:9].any() and result.defined[9:].all()


def test_realized_variance_matches_direct_sum():
    rng = np.random.default_rng(2)
    X = TimeSeries(rng.normal(size=(3, 60)) * 0.01)
    decay, window = 0.97, 12
    result = realized_variance(X, decay, window)
    weights = decay ** np.arange(window)
    weights /= weights.sum()
    for k in range(window - 1, 60):
        for i in range(3):
            direct = sum(weights[t] * X.values[i, k - t] ** 2 for t in range(window))
            assert abs(result.rv[i, k] - direct) <= 1e-12 * max(1.0, direct)
        expected_market = np.mean([math.log(result.rv[i, k]) for i in range(3)])
        assert result.market_log_rv[k] == pytest.approx(expected_market, abs=1e-12)


def test_realized_variance_parameter_checks():
    X = TimeSeries(np.ones((1, 5)))
    with pytest.raises(ConfigError):
        realized_variance(X, decay=1.0)
    with pytest.raises(InsufficientDataError):
        realized_variance(X, window=6)


def test_price_options_validation():
    assert build_price_options({"window": 500}).window == 500
    with pytest.raises(ConfigError):
        build_price_options({"rv_decay": 1.5})


def test_rolling_analysis_windows():
    X = TimeSeries(np.random.default_rng(3).normal(size=(4, 300)) * 0.01)
    price = PriceOptions(window=100, step=50, rv_window=20)
    table = rolling_analysis(X, price, SolverOptions(), 1, rule=SelectionRule(RuleMode.BIC), max_workers=1)
    assert list(table.columns) == ROLLING_COLUMNS
    assert list(table["window_start"]) == [0, 50, 100, 150, 200]
    assert list(table["window_end"]) == [99, 149, 199, 249, 299]
    assert table["error"].isna().all()
    assert ((table["sparsity_pct"] >= 0) & (table["sparsity_pct"] <= 100)).all()
    market = realized_variance(X, price.rv_decay, price.rv_window).market_log_rv
    np.testing.assert_allclose(table["market_log_rv"], market[[99, 149, 199, 249, 299]])


def test_rolling_analysis_needs_a_full_window():
    X = TimeSeries(np.zeros((2, 50)))
    with pytest.raises(InsufficientDataError):
        rolling_analysis(X, PriceOptions(window=100), SolverOptions(), 1)


@pytest.mark.slow
def test_rolling_analysis_detects_density_drop():
    dense = generate_instance(sbm_params_from_density(20, 2, density=0.2, seed=1), 1, 600).X
    sparse = generate_instance(sbm_params_from_density(20, 2, density=0.02, seed=2), 1, 600).X
    X = TimeSeries(np.hstack([dense.values, sparse.values]))
    price = PriceOptions(window=400, step=200, rv_window=40)
    table = rolling_analysis(X, price, SolverOptions(), 1, rule=SelectionRule(RuleMode.BIC))
    first, last = table.iloc[0], table.iloc[-1]
    assert first["window_end"] < 600 <= last["window_start"]
    assert first["sparsity_pct"] > last["sparsity_pct"]
