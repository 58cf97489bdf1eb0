import math

import numpy as np
import orjson
import pandas as pd
import pytest

from Core.cgp_model import AdjacencyMatrix, TimeSeries
from Core.errors import DataFormatError, SerializationError
from Simulation import generate_instance, sbm_params_from_density
from Solver import SolverOptions, fit_cgp, lambda_max
from Tools.IO.core import utils
from Tools.IO.Read import load_adjacency, load_csv, load_series
from Tools.IO.Write import serialize_results, write_adjacency, write_frame, write_series


def _write_text(path, content):
    path.write_text(content, encoding="utf-8")
    return str(path)


def test_series_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    values = rng.normal(size=(4, 30)) * np.array([[1e-300], [1.0], [1e6], [1.0 / 3.0]])
    X = TimeSeries(values, labels=("a", "b", "c", "d"))
    path = write_series(X, str(tmp_path / "series.csv"))
    loaded = load_csv(path)
    assert loaded.labels == X.labels
    np.testing.assert_array_equal(loaded.values, X.values)


def test_adjacency_round_trip_is_bit_exact(tmp_path):
    weights = np.zeros((5, 5))
    weights[0, 3] = 1.0 / 3.0
    weights[4, 1] = -2.718281828459045e-7
    path = write_adjacency(AdjacencyMatrix(weights), str(tmp_path / "adj.csv"))
    loaded = load_adjacency(path)
    np.testing.assert_array_equal(loaded.weights, weights)


def test_empty_adjacency_is_header_only(tmp_path):
    path = write_adjacency(AdjacencyMatrix.empty(3), str(tmp_path / "empty.csv"))
    with open(path, encoding="utf-8") as f:
        assert f.read() == "row,col,weight\n"
    loaded = load_adjacency(path)
    assert loaded.n_nodes == 3 and loaded.edge_count == 0


def test_adjacency_without_sidecar_infers_size(tmp_path):
    path = _write_text(tmp_path / "adj.csv", "row,col,weight\n0,2,0.5\n1,0,-1\n")
    assert load_adjacency(path).n_nodes == 3
    assert load_adjacency(path, n_nodes=6).n_nodes == 6


def test_adjacency_header_is_checked(tmp_path):
    path = _write_text(tmp_path / "adj.csv", "i,j,w\n0,1,0.5\n")
    with pytest.raises(DataFormatError):
        load_adjacency(path)


def test_undefined_values_render_as_empty_fields(tmp_path):
    frame = pd.DataFrame({"x": [1.5], "y": [math.nan]})
    path = write_frame(frame, str(tmp_path / "curve.csv"))
    with open(path, encoding="utf-8") as f:
        assert f.read() == "x,y\n1.5,\n"


def test_json_tables_use_null_for_undefined(tmp_path):
    frame = pd.DataFrame({"x": [1.5], "y": [math.nan]})
    path = write_frame(frame, str(tmp_path / "curve.json"), fmt="json")
    with open(path, "rb") as f:
        assert orjson.loads(f.read()) == [{"x": 1.5, "y": None}]
    with pytest.raises(SerializationError):
        write_frame(frame, str(tmp_path / "curve.xml"), fmt="xml")


def test_missing_cell_reports_coordinates(tmp_path):
    path = _write_text(tmp_path / "x.csv", "a,b\n1,2\n3,\n")
    with pytest.raises(DataFormatError) as info:
        load_csv(path)
    assert info.value.row == 3
    assert info.value.column == "b"
    assert info.value.category == "data_format"


def test_non_numeric_cell_reports_coordinates(tmp_path):
    path = _write_text(tmp_path / "x.csv", "a,b\n1,2\nfoo,4\n")
    with pytest.raises(DataFormatError) as info:
        load_csv(path)
    assert (info.value.row, info.value.column) == (3, "a")


def test_ragged_row_is_rejected(tmp_path):
    path = _write_text(tmp_path / "x.csv", "a,b\n1,2\n3,4,5\n")
    with pytest.raises(DataFormatError) as info:
        load_csv(path)
    assert info.value.row == 3


def test_missing_file(tmp_path):
    with pytest.raises(SerializationError):
        load_csv(str(tmp_path / "nope.csv"))


def test_log_return_transform(tmp_path):
    path = _write_text(tmp_path / "prices.csv", "p,q\n1,2\n2,2\n4,1\n")
    X = load_csv(path, transform="log_return")
    assert X.n_samples == 2
    np.testing.assert_allclose(X.values, [[math.log(2), math.log(2)], [0.0, math.log(0.5)]])


def test_log_return_rejects_non_positive_prices(tmp_path):
    path = _write_text(tmp_path / "prices.csv", "p,q\n1,2\n0,2\n")
    with pytest.raises(DataFormatError) as info:
        load_csv(path, transform="log_return")
    assert (info.value.row, info.value.column) == (3, "p")


def test_serialized_instance_carries_rerun_metadata(tmp_path):
    params = sbm_params_from_density(8, 2, density=0.1, seed=5)
    instance = generate_instance(params, 2, 80)
    paths = serialize_results(instance, str(tmp_path), "inst", {"seed": 5, "config_hash": "abc"})
    assert [p.rsplit("/", 1)[-1] for p in paths] == ["inst_series.csv", "inst_adjacency_true.csv",
                                                     "inst_poly_true.csv"]
    series, meta = load_series(paths[0])
    np.testing.assert_array_equal(series.values, instance.X.values)
    assert meta["seed"] == 5 and meta["config_hash"] == "abc"
    assert meta["kind"] == "series"
    np.testing.assert_array_equal(load_adjacency(paths[1]).weights, instance.A_true.weights)


def test_serialized_fit_records_solver_diagnostics(tmp_path):
    params = sbm_params_from_density(8, 2, density=0.1, seed=6)
    X = generate_instance(params, 2, 120).X
    result = fit_cgp(X, 2, SolverOptions(lambda1=0.2 * lambda_max(X, 2)))
    paths = serialize_results(result, str(tmp_path), "fit")
    meta = utils.read_sidecar(paths[0])
    assert meta["stop_reason"] == result.stop_reason.value
    assert meta["n_sweeps"] == result.n_sweeps
    assert set(meta["ridge"]) == {"2"}
    lags = pd.read_csv(paths[1])
    assert list(lags.columns) == ["lag", "row", "col", "weight"]
    poly = pd.read_csv(paths[2])
    assert len(poly) == 2 + 3


def test_unsupported_result_type(tmp_path):
    with pytest.raises(SerializationError):
        serialize_results(object(), str(tmp_path))


def test_config_hash_ignores_key_order():
    assert utils.config_hash({"a": 1, "b": [1, 2]}) == utils.config_hash({"b": [1, 2], "a": 1})
    assert utils.config_hash({"a": 1}) != utils.config_hash({"a": 2})
