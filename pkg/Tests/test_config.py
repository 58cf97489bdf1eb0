import logging

import pytest

from Config.CgpConfigManager import cgp_config
from Config.experiment import GridSpec, build_experiment_config
from Core.errors import ConfigError
from Simulation import sbm_params_from_density
from Tools.IO.core import config as io_config


@pytest.fixture
def restore_config():
    yield cgp_config
    cgp_config._config_path = None
    cgp_config.reload()


def test_default_sections():
    solver = cgp_config.get_solver_config()
    assert solver["lambda1_c"] == 0.05
    assert solver["max_iterations"] == 50
    assert cgp_config.get_selection_config()["grid"]["kind"] == "log"
    with pytest.raises(KeyError):
        cgp_config.get_section("agents")


def test_sections_are_copies():
    cgp_config.get_solver_config()["epsilon"] = 99.0
    assert cgp_config.get_solver_config()["epsilon"] == 0.1


def test_reload_merges_with_defaults(tmp_path, restore_config):
    path = tmp_path / "custom.yaml"
    path.write_text("cgp:\n  solver:\n    epsilon: 0.5\n", encoding="utf-8")
    assert restore_config.reload(str(path))
    solver = restore_config.get_solver_config()
    assert solver["epsilon"] == 0.5
    assert solver["lambda1_c"] == 0.05
    assert restore_config.get_price_config()["window"] == 1040


def test_broken_file_falls_back_to_defaults(tmp_path, restore_config):
    path = tmp_path / "broken.yaml"
    path.write_text("cgp: [unclosed\n", encoding="utf-8")
    restore_config.reload(str(path))
    assert restore_config.get_solver_config()["epsilon"] == 0.1


def test_experiment_requires_seed_for_simulation(tmp_path):
    sbm = sbm_params_from_density(10, 2, density=0.1).model_dump()
    with pytest.raises(ConfigError):
        build_experiment_config({"mode": "simulate", "output_dir": str(tmp_path), "sbm": sbm})
    exp = build_experiment_config({"mode": "simulate", "output_dir": str(tmp_path), "sbm": sbm, "seed": 3})
    assert exp.seed == 3


def test_experiment_mode_requirements(tmp_path):
    with pytest.raises(ConfigError):
        build_experiment_config({"mode": "fit", "output_dir": str(tmp_path)})
    with pytest.raises(ConfigError):
        build_experiment_config({"mode": "rolling", "output_dir": str(tmp_path), "input_path": "x.csv"})
    with pytest.raises(ConfigError):
        build_experiment_config({"mode": "fit", "output_dir": str(tmp_path), "input_path": "x.csv",
                                 "solver": {"lambda1": -1.0}})


def test_grid_spec_fixed_grids():
    assert GridSpec().fixed_grid() is None
    assert GridSpec(values=[3.0, 1.0, 2.0, 1.0]).fixed_grid().values == (1.0, 2.0, 3.0)
    linear = GridSpec(kind="linear", start=10, stop=20, step=5).fixed_grid()
    assert linear.values == (10.0, 15.0, 20.0)


def test_worker_cap_from_environment(monkeypatch):
    monkeypatch.setenv("CGP_MAX_WORKERS", "3")
    assert io_config.get_max_workers() == 3
    assert io_config.get_max_workers(1) == 1
    monkeypatch.setenv("CGP_MAX_WORKERS", "0")
    assert io_config.get_max_workers() == 1


def test_invalid_worker_cap_logs_warning(monkeypatch, caplog):
    monkeypatch.setenv("CGP_MAX_WORKERS", "abc")
    with caplog.at_level(logging.WARNING, logger="cgp.io"):
        workers = io_config.get_max_workers()
    assert workers >= 1
    assert any("CGP_MAX_WORKERS" in record.getMessage() for record in caplog.records)
