"""Sequential land-conversion decision process.

The agent sweeps the grid pixel by pixel in row-major order (wrapping), and
at each step picks a target class for the cursor pixel. Rewriting a pixel
from class a to class b changes runoff by (c[b] - c[a]) * i * cell_area /
3.6e6, and the negative of that change, scaled, is the step reward. Frozen
pixels are protected twice: the action mask restricts the policy to the
current class, and the step itself refuses to rewrite them.

Observation layout (15 floats): one-hot class of the cursor pixel (7),
histogram of all classes normalized to 1 (7), episode progress in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EpisodeFinished
from .grid import N_CLASSES, URBAN, WETLAND, LulcGrid, class_histogram, frozen_mask_from_classes
from .runoff import MM_HR_TO_M_S, CoefficientTable, runoff_from_histogram

OBS_SIZE = 2 * N_CLASSES + 1
N_ACTIONS = N_CLASSES

DEFAULT_FROZEN_CLASSES = frozenset({URBAN, WETLAND})


@dataclass(frozen=True)
class EnvConfig:
    steps_per_episode: int | None = None  # None means one full sweep (pixel count)
    target_reduction_m3_per_s: float = 0.0
    target_bonus: float = 0.0
    reward_scale: float = 1e3
    frozen_classes: frozenset = DEFAULT_FROZEN_CLASSES

    def __post_init__(self):
        if self.steps_per_episode is not None and self.steps_per_episode < 1:
            raise ValueError("steps_per_episode must be >= 1")
        if not self.reward_scale > 0:
            raise ValueError("reward_scale must be positive")
        if self.target_reduction_m3_per_s < 0 or self.target_bonus < 0:
            raise ValueError("target reduction and bonus must be nonnegative")
        object.__setattr__(self, "frozen_classes", frozenset(self.frozen_classes))

    def episode_length(self, grid: LulcGrid) -> int:
        return self.steps_per_episode if self.steps_per_episode is not None else grid.n_pixels


@dataclass
class EnvState:
    grid: LulcGrid  # working copy, mutated in place
    cursor: int
    step: int
    cumulative_reduction_m3_per_s: float
    baseline_runoff_m3_per_s: float
    histogram: np.ndarray
    bonus_paid: bool = False
    done: bool = False


class RunoffEnv:
    """One rollout worker owns one instance; instances are independent."""

    def __init__(self, base: LulcGrid, cfg: EnvConfig, table: CoefficientTable):
        self.base = base
        self.cfg = cfg
        self.table = table
        self.steps_per_episode = cfg.episode_length(base)
        # reward for rewriting one pixel from a to b, precomputed for all pairs
        per_pixel = table.intensity_mm_per_hr * base.cell_area_m2 * MM_HR_TO_M_S
        self._delta_q = (table.c[:, None] - table.c[None, :]) * per_pixel
        self.state: EnvState | None = None
        self._last_final_runoff: float | None = None

    def reset(self) -> np.ndarray:
        grid = self.base.with_frozen(
            self.base.frozen | frozen_mask_from_classes(self.base, self.cfg.frozen_classes)
        )
        hist = class_histogram(grid)
        baseline = runoff_from_histogram(hist, grid.cell_area_m2, self.table).total_m3_per_s
        self.state = EnvState(
            grid=grid,
            cursor=0,
            step=0,
            cumulative_reduction_m3_per_s=0.0,
            baseline_runoff_m3_per_s=baseline,
            histogram=hist,
        )
        return self._observation()

    def observation(self) -> np.ndarray:
        """Observation for the current state (same vector step() returned)."""
        return self._observation()

    def current_runoff(self) -> float:
        """Runoff of the working grid, recomputed from the live histogram."""
        st = self._require_state()
        return runoff_from_histogram(st.histogram, st.grid.cell_area_m2, self.table).total_m3_per_s

    def last_final_runoff(self) -> float | None:
        """Runoff at the end of the most recently completed episode."""
        return self._last_final_runoff

    def action_mask(self) -> np.ndarray:
        """Legal actions at the cursor; frozen pixels allow only their class."""
        st = self._require_state()
        if st.grid.frozen[st.cursor]:
            mask = np.zeros(N_ACTIONS, dtype=bool)
            mask[st.grid.cells[st.cursor]] = True
            return mask
        return np.ones(N_ACTIONS, dtype=bool)

    def step(self, action: int) -> tuple[np.ndarray, float, bool]:
        st = self._require_state()
        if st.done:
            raise EpisodeFinished("episode is over; call reset() before stepping again")
        action = int(action)
        if not 0 <= action < N_ACTIONS:
            raise ValueError(f"action must be in 0..{N_ACTIONS - 1}, got {action}")

        old = int(st.grid.cells[st.cursor])
        reward = 0.0
        if not st.grid.frozen[st.cursor] and action != old:
            st.grid.cells[st.cursor] = action
            st.histogram[old] -= 1
            st.histogram[action] += 1
            reduction = self._delta_q[old, action]  # Q_before - Q_after
            reward = reduction * self.cfg.reward_scale
            before = st.cumulative_reduction_m3_per_s
            st.cumulative_reduction_m3_per_s = before + reduction
            target = self.cfg.target_reduction_m3_per_s
            if (
                not st.bonus_paid
                and before < target
                and st.cumulative_reduction_m3_per_s >= target
            ):
                reward += self.cfg.target_bonus
                st.bonus_paid = True

        st.step += 1
        st.cursor = (st.cursor + 1) % st.grid.n_pixels
        st.done = st.step == self.steps_per_episode
        if st.done:
            self._last_final_runoff = self.current_runoff()
        return self._observation(), reward, st.done

    def _observation(self) -> np.ndarray:
        st = self._require_state()
        obs = np.empty(OBS_SIZE)
        obs[:N_CLASSES] = 0.0
        obs[st.grid.cells[st.cursor]] = 1.0
        obs[N_CLASSES : 2 * N_CLASSES] = st.histogram / st.grid.n_pixels
        obs[-1] = st.step / self.steps_per_episode
        return obs

    def _require_state(self) -> EnvState:
        if self.state is None:
            raise EpisodeFinished("environment has not been reset")
        return self.state
