"""Greedy policy rollouts, land-conversion transition matrices, and the
baseline / scenario / optimized runoff comparison."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .environment import EnvConfig, RunoffEnv
from .grid import N_CLASSES, LulcGrid
from .neural import MlpParams, forward, masked_logits
from .runoff import CoefficientTable, RunoffResult, compute_runoff
from .scenarios import scenario_runoff


@dataclass(frozen=True)
class TransitionMatrix:
    """Pixel counts, rows = class before, columns = class after."""

    counts: np.ndarray  # (7, 7) int64

    @property
    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def grand_total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_grids(cls, before: LulcGrid, after: LulcGrid) -> "TransitionMatrix":
        if before.n_pixels != after.n_pixels:
            raise ValueError("grids must have the same pixel count")
        counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
        np.add.at(counts, (before.cells, after.cells), 1)
        return cls(counts)


@dataclass(frozen=True)
class ComparisonReport:
    """Labeled runoff values: existing, one per scenario, optimized."""

    labels: tuple
    runoff_m3_per_s: tuple
    optimized_is_strict_minimum: bool

    def value(self, label: str) -> float:
        return self.runoff_m3_per_s[self.labels.index(label)]


def greedy_action(policy: MlpParams, obs: np.ndarray, mask: np.ndarray) -> int:
    """Argmax over masked logits; ties resolve to the lowest action id."""
    return int(np.argmax(masked_logits(forward(policy, obs), mask)))


def run_greedy(
    base: LulcGrid,
    policy: MlpParams,
    steps: int,
    table: CoefficientTable,
    env_cfg: EnvConfig,
) -> tuple[LulcGrid, TransitionMatrix, RunoffResult]:
    """Sweep ``steps`` cursor steps with argmax actions on a fresh copy of
    ``base``; the transition matrix compares initial vs final grids."""
    if steps < 0:
        raise ValueError("steps must be >= 0")
    env_cfg = EnvConfig(
        steps_per_episode=max(steps, 1),
        target_reduction_m3_per_s=env_cfg.target_reduction_m3_per_s,
        target_bonus=env_cfg.target_bonus,
        reward_scale=env_cfg.reward_scale,
        frozen_classes=env_cfg.frozen_classes,
    )
    env = RunoffEnv(base, env_cfg, table)
    obs = env.reset()
    initial = env.state.grid.copy()
    for _ in range(steps):
        obs, _, _ = env.step(greedy_action(policy, obs, env.action_mask()))
    final = env.state.grid
    matrix = TransitionMatrix.from_grids(initial, final)
    return final.copy(), matrix, compute_runoff(final, table)


def compare_all(
    base: LulcGrid,
    scenarios,
    policy: MlpParams,
    table: CoefficientTable,
    env_cfg: EnvConfig,
) -> ComparisonReport:
    """Existing runoff, each scenario's runoff, and the greedy-policy
    runoff after one full sweep (steps = pixel count)."""
    labels = ["existing"]
    values = [compute_runoff(base, table).total_m3_per_s]
    for scenario in scenarios:
        labels.append(scenario.name)
        values.append(scenario_runoff(base, scenario, table).total_m3_per_s)
    _, _, optimized = run_greedy(base, policy, base.n_pixels, table, env_cfg)
    labels.append("optimized")
    values.append(optimized.total_m3_per_s)
    others = values[:-1]
    is_min = all(values[-1] < v for v in others)
    return ComparisonReport(tuple(labels), tuple(values), is_min)
