"""Run configuration: a sectioned key-value text file (INI syntax).

Every key has a default, so an empty or missing file is a valid run; the
effective configuration (defaults merged with the file and CLI overrides)
is printable via the ``print-config`` command and snapshotted into the run
manifest. Empty values mean "use the built-in default".
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, replace
from pathlib import Path

from .environment import EnvConfig
from .errors import ConfigError
from .grid import LulcGrid, class_code, read_grid_csv, read_mask_csv
from .ppo import PpoConfig
from .runoff import DEFAULT_INTENSITY_MM_HR, CoefficientTable
from .seed_grid import make_seed_grid

MAX_SEED = 2**64 - 1

DEFAULTS = {
    "grid": {
        "grid_csv": "",
        "frozen_csv": "",
    },
    "runoff": {
        "coefficients_csv": "",
        "rainfall_intensity_mm_hr": repr(DEFAULT_INTENSITY_MM_HR),
    },
    "env": {
        "steps_per_episode": "",
        "target_reduction_m3_per_s": "0.0",
        "target_bonus": "0.0",
        "reward_scale": "1000.0",
        "frozen_classes": "urban,wetland",
    },
    "ppo": {
        "gamma": "0.99",
        "gae_lambda": "0.95",
        "clip_epsilon": "0.2",
        "epochs_per_update": "4",
        "minibatch_size": "256",
        "rollout_horizon": "2048",
        "value_coef": "0.5",
        "entropy_coef": "0.01",
        "learning_rate": "0.0003",
        "total_updates": "200",
    },
    "run": {
        "seed": "1",
        "out_dir": "out",
        "workers": "1",
        "checkpoint_every": "50",
    },
}


@dataclass(frozen=True)
class RunConfig:
    grid_csv: str = ""
    frozen_csv: str = ""
    coefficients_csv: str = ""
    rainfall_intensity_mm_hr: float = DEFAULT_INTENSITY_MM_HR
    steps_per_episode: int | None = None
    target_reduction_m3_per_s: float = 0.0
    target_bonus: float = 0.0
    reward_scale: float = 1e3
    frozen_classes: tuple = ("urban", "wetland")
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip_epsilon: float = 0.2
    epochs_per_update: int = 4
    minibatch_size: int = 256
    rollout_horizon: int = 2048
    value_coef: float = 0.5
    entropy_coef: float = 0.01
    learning_rate: float = 3e-4
    total_updates: int = 200
    seed: int = 1
    out_dir: str = "out"
    workers: int = 1
    checkpoint_every: int = 50
    source_path: str | None = None

    def validate(self) -> "RunConfig":
        for label, p in (("grid_csv", self.grid_csv), ("frozen_csv", self.frozen_csv),
                         ("coefficients_csv", self.coefficients_csv)):
            if p and not Path(p).exists():
                raise ConfigError(f"{label} path does not exist: {p}")
        if not 0 <= self.seed <= MAX_SEED:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in self.frozen_classes:
            class_code(name)  # raises ConfigError on unknown names
        try:
            self.env_config()
            self.ppo_config()
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    def load_grid(self) -> LulcGrid:
        grid = make_seed_grid() if not self.grid_csv else read_grid_csv(self.grid_csv)
        if self.frozen_csv:
            frozen = read_mask_csv(self.frozen_csv, expect_shape=(grid.width, grid.height))
            grid = grid.with_frozen(frozen)
        return grid

    def load_table(self) -> CoefficientTable:
        if self.coefficients_csv:
            return CoefficientTable.from_csv(self.coefficients_csv, self.rainfall_intensity_mm_hr)
        return CoefficientTable.default(self.rainfall_intensity_mm_hr)

    def env_config(self) -> EnvConfig:
        return EnvConfig(
            steps_per_episode=self.steps_per_episode,
            target_reduction_m3_per_s=self.target_reduction_m3_per_s,
            target_bonus=self.target_bonus,
            reward_scale=self.reward_scale,
            frozen_classes=frozenset(class_code(n) for n in self.frozen_classes),
        )

    def ppo_config(self) -> PpoConfig:
        return PpoConfig(
            gamma=self.gamma,
            gae_lambda=self.gae_lambda,
            clip_epsilon=self.clip_epsilon,
            epochs_per_update=self.epochs_per_update,
            minibatch_size=self.minibatch_size,
            rollout_horizon=self.rollout_horizon,
            value_coef=self.value_coef,
            entropy_coef=self.entropy_coef,
            learning_rate=self.learning_rate,
            total_updates=self.total_updates,
            seed=self.seed,
        )

    def render(self) -> str:
        """Effective configuration as INI text."""
        parser = configparser.ConfigParser()
        values = {
            "grid": {"grid_csv": self.grid_csv, "frozen_csv": self.frozen_csv},
            "runoff": {
                "coefficients_csv": self.coefficients_csv,
                "rainfall_intensity_mm_hr": repr(self.rainfall_intensity_mm_hr),
            },
            "env": {
                "steps_per_episode": "" if self.steps_per_episode is None else str(self.steps_per_episode),
                "target_reduction_m3_per_s": repr(self.target_reduction_m3_per_s),
                "target_bonus": repr(self.target_bonus),
                "reward_scale": repr(self.reward_scale),
                "frozen_classes": ",".join(self.frozen_classes),
            },
            "ppo": {
                "gamma": repr(self.gamma),
                "gae_lambda": repr(self.gae_lambda),
                "clip_epsilon": repr(self.clip_epsilon),
                "epochs_per_update": str(self.epochs_per_update),
                "minibatch_size": str(self.minibatch_size),
                "rollout_horizon": str(self.rollout_horizon),
                "value_coef": repr(self.value_coef),
                "entropy_coef": repr(self.entropy_coef),
                "learning_rate": repr(self.learning_rate),
                "total_updates": str(self.total_updates),
            },
            "run": {
                "seed": str(self.seed),
                "out_dir": self.out_dir,
                "workers": str(self.workers),
                "checkpoint_every": str(self.checkpoint_every),
            },
        }
        parser.read_dict(values)
        buf = io.StringIO()
        parser.write(buf)
        return buf.getvalue()


def _get(parser, section: str, key: str) -> str:
    try:
        value = parser.get(section, key, fallback=DEFAULTS[section][key])
    except KeyError:
        raise ConfigError(f"unknown config key [{section}] {key}") from None
    return value.strip()


def _parse_int(raw: str, where: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{where} must be an integer, got {raw!r}") from None


def _parse_float(raw: str, where: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{where} must be a number, got {raw!r}") from None


def load_config(path=None) -> RunConfig:
    """Parse an INI config file merged over the defaults.

    ``path=None`` yields the built-in default configuration (bundled seed
    grid, default coefficients).
    """
    parser = configparser.ConfigParser()
    source = None
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            parser.read_string(path.read_text())
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from None
        source = str(path)
        for section in parser.sections():
            if section not in DEFAULTS:
                raise ConfigError(f"unknown config section [{section}] in {path}")
            for key in parser[section]:
                if key not in DEFAULTS[section]:
                    raise ConfigError(f"unknown config key [{section}] {key} in {path}")

    steps_raw = _get(parser, "env", "steps_per_episode")
    frozen_raw = _get(parser, "env", "frozen_classes")
    frozen = tuple(n.strip() for n in frozen_raw.split(",") if n.strip()) if frozen_raw else ()
    return RunConfig(
        grid_csv=_get(parser, "grid", "grid_csv"),
        frozen_csv=_get(parser, "grid", "frozen_csv"),
        coefficients_csv=_get(parser, "runoff", "coefficients_csv"),
        rainfall_intensity_mm_hr=_parse_float(
            _get(parser, "runoff", "rainfall_intensity_mm_hr"), "[runoff] rainfall_intensity_mm_hr"
        ),
        steps_per_episode=None if steps_raw == "" else _parse_int(steps_raw, "[env] steps_per_episode"),
        target_reduction_m3_per_s=_parse_float(
            _get(parser, "env", "target_reduction_m3_per_s"), "[env] target_reduction_m3_per_s"
        ),
        target_bonus=_parse_float(_get(parser, "env", "target_bonus"), "[env] target_bonus"),
        reward_scale=_parse_float(_get(parser, "env", "reward_scale"), "[env] reward_scale"),
        frozen_classes=frozen,
        gamma=_parse_float(_get(parser, "ppo", "gamma"), "[ppo] gamma"),
        gae_lambda=_parse_float(_get(parser, "ppo", "gae_lambda"), "[ppo] gae_lambda"),
        clip_epsilon=_parse_float(_get(parser, "ppo", "clip_epsilon"), "[ppo] clip_epsilon"),
        epochs_per_update=_parse_int(_get(parser, "ppo", "epochs_per_update"), "[ppo] epochs_per_update"),
        minibatch_size=_parse_int(_get(parser, "ppo", "minibatch_size"), "[ppo] minibatch_size"),
        rollout_horizon=_parse_int(_get(parser, "ppo", "rollout_horizon"), "[ppo] rollout_horizon"),
        value_coef=_parse_float(_get(parser, "ppo", "value_coef"), "[ppo] value_coef"),
        entropy_coef=_parse_float(_get(parser, "ppo", "entropy_coef"), "[ppo] entropy_coef"),
        learning_rate=_parse_float(_get(parser, "ppo", "learning_rate"), "[ppo] learning_rate"),
        total_updates=_parse_int(_get(parser, "ppo", "total_updates"), "[ppo] total_updates"),
        seed=_parse_int(_get(parser, "run", "seed"), "[run] seed"),
        out_dir=_get(parser, "run", "out_dir"),
        workers=_parse_int(_get(parser, "run", "workers"), "[run] workers"),
        checkpoint_every=_parse_int(_get(parser, "run", "checkpoint_every"), "[run] checkpoint_every"),
        source_path=source,
    )


def apply_overrides(cfg: RunConfig, *, seed=None, out=None, workers=None, updates=None) -> RunConfig:
    changes = {}
    if seed is not None:
        changes["seed"] = seed
    if out is not None:
        changes["out_dir"] = str(out)
    if workers is not None:
        changes["workers"] = workers
    if updates is not None:
        changes["total_updates"] = updates
    return replace(cfg, **changes) if changes else cfg
