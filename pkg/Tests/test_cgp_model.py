import numpy as np
import pytest

from Core.cgp_model import (
    AdjacencyMatrix,
    LagCoefficients,
    NoiseSpec,
    PolyCoefficients,
    TimeSeries,
    cgp_lag_matrices,
    graph_filter,
    lagged_design,
    predict,
    simulate,
)
from Core.errors import (
    ConfigError,
    DimensionError,
    InstabilityError,
    NonFiniteInputError,
    OutOfRangeError,
)


def _make_adjacency(n=4, seed=0):
    rng = np.random.default_rng(seed)
    weights = rng.normal(size=(n, n)) * (rng.random((n, n)) < 0.5)
    np.fill_diagonal(weights, 0.0)
    return AdjacencyMatrix(weights)


def test_first_lag_filter_is_adjacency():
    A = _make_adjacency()
    np.testing.assert_array_equal(graph_filter(A, PolyCoefficients.trivial(3), 1), A.weights)


def test_graph_filter_matches_explicit_powers():
    A = _make_adjacency(seed=3)
    C = PolyCoefficients(3, {(2, 0): 0.1, (2, 1): -0.2, (2, 2): 0.3, (3, 3): 0.05, (3, 1): 0.4})
    W = A.weights
    I = np.eye(W.shape[0])
    expected_2 = 0.1 * I - 0.2 * W + 0.3 * W @ W
    expected_3 = 0.4 * W + 0.05 * W @ W @ W
    np.testing.assert_allclose(graph_filter(A, C, 2), expected_2, atol=1e-14)
    np.testing.assert_allclose(graph_filter(A, C, 3), expected_3, atol=1e-14)

    R = cgp_lag_matrices(A, C)
    assert R.n_lags == 3
    np.testing.assert_allclose(R.lag(2), expected_2, atol=1e-14)


def test_graph_filter_rejects_bad_lag():
    with pytest.raises(OutOfRangeError):
        graph_filter(_make_adjacency(), PolyCoefficients.trivial(2), 3)


def test_first_order_coefficients_are_fixed():
    C = PolyCoefficients(2, {(1, 1): 1.0, (2, 0): 0.5})
    assert C[(1, 0)] == 0.0
    assert C[(1, 1)] == 1.0
    assert C.free_indices() == [(2, 0), (2, 1), (2, 2)]
    np.testing.assert_array_equal(C.free_vector(), [0.5, 0.0, 0.0])
    with pytest.raises(ConfigError):
        PolyCoefficients(2, {(1, 1): 2.0})
    with pytest.raises(OutOfRangeError):
        PolyCoefficients(2, {(2, 3): 1.0})


def test_free_vector_length_is_checked():
    with pytest.raises(DimensionError):
        PolyCoefficients.from_free_vector(3, [0.1, 0.2])
    C = PolyCoefficients.from_free_vector(3, np.arange(7) / 10.0)
    assert C[(3, 3)] == pytest.approx(0.6)
    assert C.as_dict()["1,1"] == 1.0


def test_timeseries_validation():
    with pytest.raises(NonFiniteInputError):
        TimeSeries(np.array([[1.0, np.nan]]))
    with pytest.raises(DimensionError):
        TimeSeries(np.zeros((2, 3)), labels=("a",))
    X = TimeSeries(np.arange(10.0).reshape(2, 5))
    assert X.labels == ("node_0", "node_1")
    assert X.window(1, 3).n_samples == 2
    with pytest.raises(OutOfRangeError):
        X.window(3, 9)


def test_lagged_design_shapes():
    X = TimeSeries(np.arange(12.0).reshape(2, 6))
    target, lags = lagged_design(X, 2)
    assert target.shape == (2, 4)
    np.testing.assert_array_equal(target[:, 0], X.values[:, 2])
    np.testing.assert_array_equal(lags[0][:, 0], X.values[:, 1])
    np.testing.assert_array_equal(lags[1][:, 0], X.values[:, 0])


def test_predict_sums_lag_contributions():
    rng = np.random.default_rng(1)
    X = TimeSeries(rng.normal(size=(3, 8)))
    R = LagCoefficients((rng.normal(size=(3, 3)), rng.normal(size=(3, 3))))
    expected = R.lag(1) @ X.values[:, 4] + R.lag(2) @ X.values[:, 3]
    np.testing.assert_allclose(predict(X, R, 5), expected)
    with pytest.raises(OutOfRangeError):
        predict(X, R, 1)


def test_simulate_geometric_decay_without_noise():
    series = simulate(AdjacencyMatrix(np.array([[0.5]])), PolyCoefficients.trivial(1), K=5, burn_in=0,
                      noise=NoiseSpec(sigma=0.0), initial_history=np.array([[2.0]]))
    np.testing.assert_allclose(series.values.ravel(), [1.0, 0.5, 0.25, 0.125, 0.0625])


def test_simulate_is_reproducible_for_a_seed():
    A = AdjacencyMatrix(np.array([[0.0, 0.3], [-0.2, 0.0]]))
    first = simulate(A, PolyCoefficients.trivial(1), K=50, burn_in=10, noise=NoiseSpec(sigma=1.0, seed=4))
    second = simulate(A, PolyCoefficients.trivial(1), K=50, burn_in=10, noise=NoiseSpec(sigma=1.0, seed=4))
    np.testing.assert_array_equal(first.values, second.values)


def test_simulate_reports_divergence():
    with pytest.raises(InstabilityError) as info:
        simulate(AdjacencyMatrix(np.array([[3.0]])), PolyCoefficients.trivial(1), K=100, burn_in=0,
                 noise=NoiseSpec(sigma=1.0, seed=9))
    assert info.value.seed == 9
    assert info.value.category == "instability"


def test_noise_spec_rejects_negative_sigma():
    with pytest.raises(ConfigError):
        NoiseSpec(sigma=-1.0)
