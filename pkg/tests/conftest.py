"""Shared fixtures: quick grids and an isolated user configuration."""

import pytest


QUICK_CONFIG = {
    "algebra": {"blocks": [2]},
    "states": {"omega": {"diag": [0.75, 0.25]}},
    "grid": {"T": 20.0, "dt": 0.02},
    "lambda_grid": {"L": 40.0, "dlambda": 0.02},
    "tolerances": {"haagerup": 1e-4, "corr": 1e-4},
    "experiments": [],
}


@pytest.fixture
def quick_grids():
    from modtrace.calculus.interpolators import LambdaGrid
    from modtrace.calculus.sections import TimeGrid
    return TimeGrid(20.0, 0.02), LambdaGrid(40.0, 0.02)


@pytest.fixture
def omega():
    from modtrace.calculus.algebra import Functional
    return Functional.diagonal([0.75, 0.25])


@pytest.fixture
def isolated_config(tmp_path, monkeypatch):
    """Point the user config at tmp_path and drop MODTRACE_* overrides."""
    import os

    from modtrace.harness import config as config_mod

    monkeypatch.setattr(config_mod, "CONFIG_DIR", tmp_path / ".modtrace")
    monkeypatch.setattr(config_mod, "CONFIG_FILE", tmp_path / ".modtrace" / "config.json")
    for name in list(os.environ):
        if name.startswith(config_mod.ENV_PREFIX):
            monkeypatch.delenv(name)
    return tmp_path / ".modtrace" / "config.json"


@pytest.fixture
def quick_experiment():
    """Build an ExperimentConfig on the quick grids from a list of experiments."""
    import copy

    from modtrace.harness.experiment import parse_experiment_config

    def build(experiments, **extra):
        data = copy.deepcopy(QUICK_CONFIG)
        data["experiments"] = experiments
        data.update(extra)
        return parse_experiment_config(data)
    return build
