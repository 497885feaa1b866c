"""Prescribed land-management scenarios over class histograms.

A scenario requests relative per-class area changes (for example barren
-50%, grassland +50%). Requested targets are rounded per class, which can
break pixel conservation, so a deterministic residual rule restores it:

  * target_k = round_half_away_from_zero(count_k * (1 + p_k)) for changed
    classes, count_k for unchanged ones;
  * the residual (total - sum of targets) goes to the changed class with
    the largest requested increase, ties broken by lowest class code;
  * if that class cannot absorb a negative residual without going below
    zero, the next-largest candidate absorbs it instead; if none can, the
    scenario is infeasible.

Targets are evaluated in exact rational arithmetic so every platform
rounds identically.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyGrid, InfeasibleScenario
from .grid import CLASS_NAMES, N_CLASSES, LulcGrid, class_code, class_histogram
from .runoff import CoefficientTable, RunoffResult, runoff_from_histogram

NO_CHANGE = None


@dataclass(frozen=True)
class Scenario:
    """Per-class relative deltas; None means the class is left alone."""

    name: str
    deltas: tuple  # length 7 of float | None

    def __post_init__(self):
        if len(self.deltas) != N_CLASSES:
            raise ConfigError(f"scenario {self.name!r} needs {N_CLASSES} delta entries")
        for code, p in enumerate(self.deltas):
            if p is not None and not p > -1.0:
                raise ConfigError(
                    f"scenario {self.name!r}: delta for {CLASS_NAMES[code]} must be > -1, got {p}"
                )

    def changed_classes(self) -> list[int]:
        return [k for k, p in enumerate(self.deltas) if p is not None]


@dataclass(frozen=True)
class ReallocationReport:
    before: np.ndarray
    after: np.ndarray
    targets: np.ndarray
    residual: int
    residual_assigned_to: int | None  # class code, or None when residual is 0


def _scenario(name: str, **changes: float) -> Scenario:
    deltas = [NO_CHANGE] * N_CLASSES
    for cls_name, p in changes.items():
        deltas[class_code(cls_name)] = p
    return Scenario(name, tuple(deltas))


def builtin_scenarios() -> list[Scenario]:
    """The five built-in management scenarios, ids s1..s5."""
    return [
        _scenario("s1", barren=-0.50, agriculture=-0.10, grassland=+0.50, wetland=+0.10),
        _scenario("s2", agriculture=+0.10, grassland=-0.50, forest=-0.10),
        _scenario("s3", barren=+0.50, agriculture=+0.15, grassland=-0.20),
        _scenario("s4", barren=-0.50, agriculture=+0.20, grassland=-0.875, forest=-0.50, wetland=-0.50),
        _scenario("s5", barren=-0.50, agriculture=-0.20, grassland=+0.75, forest=+1.00, wetland=+1.00),
    ]


def builtin_scenario(scenario_id: str) -> Scenario:
    for s in builtin_scenarios():
        if s.name == scenario_id:
            return s
    raise ConfigError(f"unknown scenario id {scenario_id!r}; built-ins are s1..s5")


def _round_half_away(x: Fraction) -> int:
    # round-half-away-from-zero on an exact rational
    if x >= 0:
        return int((2 * x.numerator + x.denominator) // (2 * x.denominator))
    return -_round_half_away(-x)


def apply_scenario(hist: np.ndarray, scenario: Scenario) -> ReallocationReport:
    """Apply a scenario to a histogram with exact pixel conservation."""
    before = np.asarray(hist, dtype=np.int64).copy()
    total = int(before.sum())
    if total <= 0:
        raise EmptyGrid("cannot apply a scenario to an empty histogram")

    targets = before.copy()
    for k in scenario.changed_classes():
        factor = 1 + Fraction(scenario.deltas[k])  # exact value of the binary float
        targets[k] = _round_half_away(int(before[k]) * factor)
        if targets[k] < 0:
            raise InfeasibleScenario(
                f"scenario {scenario.name!r} drives {CLASS_NAMES[k]} below zero", violating_class=k
            )

    residual = total - int(targets.sum())
    after = targets.copy()
    assigned: int | None = None
    if residual != 0:
        candidates = sorted(scenario.changed_classes(), key=lambda k: (-scenario.deltas[k], k))
        for k in candidates:
            if targets[k] + residual >= 0:
                after[k] = targets[k] + residual
                assigned = k
                break
        else:
            k = candidates[0] if candidates else 0
            raise InfeasibleScenario(
                f"scenario {scenario.name!r}: residual {residual} cannot be absorbed "
                f"by any changed class (first candidate {CLASS_NAMES[k]})",
                violating_class=k,
            )

    return ReallocationReport(before, after, targets, residual, assigned)


def scenario_runoff(grid: LulcGrid, scenario: Scenario, table: CoefficientTable) -> RunoffResult:
    """Runoff after applying the scenario to the grid's histogram.

    The rational method depends only on class areas, so no spatial
    realization of the scenario is needed.
    """
    report = apply_scenario(class_histogram(grid), scenario)
    return runoff_from_histogram(report.after, grid.cell_area_m2, table)


def read_scenario_csv(path) -> Scenario:
    """Load ``class_name,delta`` rows; delta is a signed fraction or ``nc``."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"scenario file not found: {path}")
    deltas: list = [NO_CHANGE] * N_CLASSES
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().lower() in ("", "class_name"):
                continue
            if len(row) != 2:
                raise ConfigError(f"bad scenario row {row!r} in {path}")
            code = class_code(row[0])
            raw = row[1].strip().lower()
            if raw == "nc":
                deltas[code] = NO_CHANGE
            else:
                try:
                    deltas[code] = float(raw)
                except ValueError:
                    raise ConfigError(f"bad delta {row[1]!r} in {path}; use a number or 'nc'") from None
    return Scenario(path.stem, tuple(deltas))
