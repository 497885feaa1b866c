"""Land-cover change policy learning for runoff reduction.

A gridworld of land-cover pixels, a rational-method runoff model, five
prescribed management scenarios, and a from-scratch PPO agent that learns
which per-pixel conversions cut surface runoff the most.
"""

__version__ = "0.1.0"

from .environment import EnvConfig, RunoffEnv
from .grid import CLASS_NAMES, LulcGrid, class_histogram
from .ppo import PpoConfig, train
from .runoff import CoefficientTable, compute_runoff
from .scenarios import Scenario, apply_scenario, builtin_scenarios, scenario_runoff
from .seed_grid import make_seed_grid

__all__ = [
    "CLASS_NAMES",
    "CoefficientTable",
    "EnvConfig",
    "LulcGrid",
    "PpoConfig",
    "RunoffEnv",
    "Scenario",
    "apply_scenario",
    "builtin_scenarios",
    "class_histogram",
    "compute_runoff",
    "make_seed_grid",
    "scenario_runoff",
    "train",
]
