"""Two-tier pedestrian flow simulator.

An agent tier (stochastic stop-and-go social-force dynamics) and a
density tier (two-state conservation-law solver with the matching
velocity closure), plus the metrics that compare them.
"""

from .forces import ForceParams, MorseKernel
from .geometry import Rect, ReflectionParams, WalkableDomain
from .grid import Grid
from .macro import MacroField, MacroModel, run_macro
from .metrics import crossing_time, lp_error, mass_balance_grid, mass_balance_points
from .micro import MicroModel, MicroState, empirical_density, run_ensemble
from .rates import BandRegion, DiscRegion, RateMap, RatePair
from .scenario import (
    Scenario,
    ScenarioError,
    load_preset,
    load_scenario,
    preset_names,
    resolve_scenario,
    save_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "ForceParams",
    "MorseKernel",
    "Rect",
    "ReflectionParams",
    "WalkableDomain",
    "Grid",
    "MacroField",
    "MacroModel",
    "run_macro",
    "crossing_time",
    "lp_error",
    "mass_balance_grid",
    "mass_balance_points",
    "MicroModel",
    "MicroState",
    "empirical_density",
    "run_ensemble",
    "BandRegion",
    "DiscRegion",
    "RateMap",
    "RatePair",
    "Scenario",
    "ScenarioError",
    "load_preset",
    "load_scenario",
    "preset_names",
    "resolve_scenario",
    "save_scenario",
    "__version__",
]
