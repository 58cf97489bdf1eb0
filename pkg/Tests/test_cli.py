import os

import pandas as pd
import pytest

import Cli.main as cli_module
from Cli.main import cli_main
from Config.CgpConfigManager import cgp_config
from Tools.IO.core import utils


def _simulate(out_dir, seed=4):
    return cli_main(["simulate", "--n", "12", "--clusters", "2", "--lags", "1", "--k", "200",
                     "--seed", str(seed), "--density", "0.1", "--out", str(out_dir)])


def _read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_simulate_writes_instance_files(tmp_path, capsys):
    assert _simulate(tmp_path) == 0
    out = capsys.readouterr().out
    for name in ("instance_series.csv", "instance_adjacency_true.csv", "instance_poly_true.csv"):
        assert os.path.exists(tmp_path / name)
        assert f"wrote {tmp_path / name}" in out
    meta = utils.read_sidecar(str(tmp_path / "instance_series.csv"))
    assert meta["seed"] == 4
    assert meta["config"]["mode"] == "simulate"
    assert len(meta["config_hash"]) == 64


def test_simulate_is_deterministic(tmp_path):
    assert _simulate(tmp_path / "a") == 0
    assert _simulate(tmp_path / "b") == 0
    for name in ("instance_series.csv", "instance_adjacency_true.csv", "instance_poly_true.csv"):
        assert _read_bytes(tmp_path / "a" / name) == _read_bytes(tmp_path / "b" / name)
    meta_a = utils.read_sidecar(str(tmp_path / "a" / "instance_series.csv"))
    meta_b = utils.read_sidecar(str(tmp_path / "b" / "instance_series.csv"))
    meta_a.pop("created_at")
    meta_b.pop("created_at")
    assert meta_a == meta_b


def test_missing_seed_is_a_usage_error(tmp_path, capsys):
    code = cli_main(["simulate", "--n", "5", "--k", "50", "--out", str(tmp_path)])
    assert code == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1].startswith("error category=usage_error message=")


def test_fit_with_truth_reports_recovery(tmp_path, capsys):
    assert _simulate(tmp_path / "sim") == 0
    series = str(tmp_path / "sim" / "instance_series.csv")
    truth = str(tmp_path / "sim" / "instance_adjacency_true.csv")
    code = cli_main(["fit", "--input", series, "--lags", "1", "--lambda1", "20", "--truth", truth,
                     "--out", str(tmp_path / "fit")])
    assert code == 0
    out = capsys.readouterr().out
    assert "stop_reason=" in out
    recovery = pd.read_csv(tmp_path / "fit" / "fit_recovery.csv")
    assert {"nbde_pct", "true_positive_pct", "false_positive_pct"} <= set(recovery.columns)
    meta = utils.read_sidecar(str(tmp_path / "fit" / "fit_adjacency.csv"))
    assert meta["config"]["solver"]["lambda1"] == 20.0


def test_select_with_bic_and_plot_data(tmp_path):
    assert _simulate(tmp_path / "sim") == 0
    series = str(tmp_path / "sim" / "instance_series.csv")
    truth = str(tmp_path / "sim" / "instance_adjacency_true.csv")
    code = cli_main(["select", "--input", series, "--lags", "1", "--rule", "bic", "--grid-points", "6",
                     "--truth", truth, "--emit-plot-data", "--out", str(tmp_path / "sel")])
    assert code == 0
    curve = pd.read_csv(tmp_path / "sel" / "select_curve.csv")
    assert len(curve) == 6
    plot = pd.read_csv(tmp_path / "sel" / "select_plot_data.csv")
    assert "edge_count_diff" in plot.columns
    meta = utils.read_sidecar(str(tmp_path / "sel" / "select_curve.csv"))
    assert meta["lambda_refit"] > meta["selected_lambda1"]


def test_select_without_peak_exits_with_selection_failure(tmp_path, capsys):
    assert _simulate(tmp_path / "sim") == 0
    series = str(tmp_path / "sim" / "instance_series.csv")
    code = cli_main(["select", "--input", series, "--lags", "1", "--lambdas", "1,2",
                     "--out", str(tmp_path / "sel")])
    assert code == 3
    assert "error category=selection_failure" in capsys.readouterr().err


def test_unknown_rule_is_a_config_error(tmp_path, capsys):
    assert _simulate(tmp_path / "sim") == 0
    series = str(tmp_path / "sim" / "instance_series.csv")
    code = cli_main(["select", "--input", series, "--rule", "median", "--lambdas", "1,2,3",
                     "--out", str(tmp_path / "sel")])
    assert code == 2
    assert "error category=invalid_config" in capsys.readouterr().err


def test_missing_input_is_a_runtime_error(tmp_path, capsys):
    code = cli_main(["fit", "--input", str(tmp_path / "none.csv"), "--lambda1", "1", "--out", str(tmp_path)])
    assert code == 1
    assert "error category=io_failure" in capsys.readouterr().err


def test_benchmark_writes_summary(tmp_path):
    code = cli_main(["benchmark", "--n", "10", "--clusters", "2", "--lags", "1", "--k", "200",
                     "--samples", "2", "--seed", "0", "--rule", "oracle", "--grid-points", "5",
                     "--density", "0.1", "--out", str(tmp_path)])
    assert code == 0
    summary = pd.read_csv(tmp_path / "benchmark_summary_table.csv")
    assert set(summary["rule"]) == {"oracle"}
    per_seed = pd.read_csv(tmp_path / "benchmark_per_seed_table.csv")
    assert list(per_seed["seed"]) == [0, 1]


def test_profile_single_size(tmp_path, capsys):
    code = cli_main(["profile", "--axis", "n", "--sizes", "10", "--clusters", "2", "--lags", "1",
                     "--k", "100", "--out", str(tmp_path)])
    assert code == 0
    assert "slope=nan" in capsys.readouterr().out
    assert os.path.exists(tmp_path / "profile_table.csv")


@pytest.mark.parametrize("argv", [["--help"], ["select", "--help"]])
def test_help_exits_cleanly(argv, capsys):
    assert cli_main(argv) == 0
    assert "--" in capsys.readouterr().out


def test_table_format_defaults_to_io_config(tmp_path, monkeypatch):
    monkeypatch.setitem(cgp_config._config["io"], "format", "json")
    assert _simulate(tmp_path / "sim") == 0
    series = str(tmp_path / "sim" / "instance_series.csv")
    code = cli_main(["select", "--input", series, "--lags", "1", "--rule", "bic", "--grid-points", "5",
                     "--out", str(tmp_path / "sel")])
    assert code == 0
    assert os.path.exists(tmp_path / "sel" / "select_curve.json")
    assert not os.path.exists(tmp_path / "sel" / "select_curve.csv")


def test_unexpected_exception_is_reported_as_internal_error(tmp_path, monkeypatch, capsys):
    def _boom(*args, **kwargs):
        raise RuntimeError("boom\nsecond line")

    monkeypatch.setattr(cli_module, "timing_profile", _boom)
    code = cli_main(["profile", "--axis", "n", "--sizes", "10", "--out", str(tmp_path)])
    assert code == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert err[-1] == "error category=internal_error message=RuntimeError: boom second line"
