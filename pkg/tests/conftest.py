"""Shared scenario builders for the test suite."""
import copy

import pytest

from pedflow.scenario import Scenario, scenario_from_dict

BASE = {
    "name": "tiny",
    "domain": {
        "x_min": -2.0, "x_max": 2.0, "y_min": -1.0, "y_max": 1.0,
        "obstacles": [], "closed": False,
    },
    "reflection": {"epsilon": 0.1},
    "forces": {
        "comfort_speed": 1.0,
        "relaxation_time": 1.0,
        "destination": [100.0, 0.0],
        "kernel": {"amplitude": 2.0, "attraction_range": 1.0,
                   "repulsion_range": 0.5, "offset": 0.9},
        "truncation_radius": None,
    },
    "rates": {
        "stopped": {"default": 6.0, "regions": []},
        "walking": {"default": 5.0, "regions": []},
    },
    "initial": {"rect": {"x_min": -1.5, "x_max": -0.5, "y_min": -0.5, "y_max": 0.5},
                "p_stop": 0.5},
    "micro": {"n_pedestrians": 8, "n_replicates": 3, "dt": 0.01},
    "macro": {"dx": 0.1, "dy": 0.1, "cfl": 0.45},
    "horizon": 0.1,
    "snapshot_times": [0.0, 0.05, 0.1],
    "cuts": [-1.0, 0.0],
    "seed": 7,
    "out_dir": None,
}


def make_scenario(**overrides) -> Scenario:
    """Small corridor scenario; keyword paths override nested fields,
    e.g. make_scenario(micro={"dt": 0.02}, horizon=1.0)."""
    data = copy.deepcopy(BASE)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            _merge(data[key], value)
        else:
            data[key] = value
    return scenario_from_dict(data)


def make_raw(**overrides) -> dict:
    """Same as make_scenario but returns the raw dict (for invalid cases)."""
    data = copy.deepcopy(BASE)
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            _merge(data[key], value)
        else:
            data[key] = value
    return data


def _merge(dst: dict, src: dict) -> None:
    for key, value in src.items():
        if isinstance(value, dict) and isinstance(dst.get(key), dict):
            _merge(dst[key], value)
        else:
            dst[key] = value


@pytest.fixture
def tiny_scenario() -> Scenario:
    return make_scenario()
