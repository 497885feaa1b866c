"""Rational-method runoff estimation over a class histogram.

Unit convention, fixed for the whole package:

    Q [m^3/s] = C * i [mm/hr] * A [m^2] / 3.6e6

where C is the area-weighted mean runoff coefficient of the grid. With one
uniform cell area the weighting reduces to pixel counts, so runoff depends
on the histogram only, never on pixel placement.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyGrid
from .grid import CLASS_NAMES, N_CLASSES, WETLAND, LulcGrid, class_code, class_histogram

MM_HR_TO_M_S = 1.0 / 3.6e6

# Per-class runoff coefficients. The ordering matters more than the values:
# wetland must be the strict minimum so conversions to wetland always reduce
# runoff. All values are config-overridable.
DEFAULT_COEFFICIENTS = {
    "water": 0.95,
    "urban": 0.85,
    "barren": 0.60,
    "agriculture": 0.40,
    "grassland": 0.30,
    "forest": 0.15,
    "wetland": 0.05,
}

DEFAULT_INTENSITY_MM_HR = 10.0


@dataclass(frozen=True)
class CoefficientTable:
    """Runoff coefficient per class plus the design rainfall intensity."""

    c: np.ndarray  # shape (7,), values in [0, 1]
    intensity_mm_per_hr: float

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.float64).reshape(-1)
        if c.size != N_CLASSES:
            raise ConfigError(f"coefficient table needs {N_CLASSES} entries, got {c.size}")
        if (c < 0).any() or (c > 1).any():
            raise ConfigError("runoff coefficients must lie in [0, 1]")
        others = np.delete(c, WETLAND)
        if not (c[WETLAND] < others).all():
            raise ConfigError("wetland coefficient must be the strict minimum of the table")
        if not self.intensity_mm_per_hr >= 0:
            raise ConfigError(f"rainfall intensity must be nonnegative, got {self.intensity_mm_per_hr}")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @classmethod
    def default(cls, intensity_mm_per_hr: float = DEFAULT_INTENSITY_MM_HR) -> "CoefficientTable":
        c = np.array([DEFAULT_COEFFICIENTS[name] for name in CLASS_NAMES])
        return cls(c, intensity_mm_per_hr)

    @classmethod
    def from_csv(cls, path, intensity_mm_per_hr: float) -> "CoefficientTable":
        """Load a ``class_name,coefficient`` CSV; all seven classes required."""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"coefficient table not found: {path}")
        values: dict[int, float] = {}
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].strip().lower() in ("", "class_name"):
                    continue
                if len(row) != 2:
                    raise ConfigError(f"bad coefficient row {row!r} in {path}")
                values[class_code(row[0])] = float(row[1])
        missing = [CLASS_NAMES[k] for k in range(N_CLASSES) if k not in values]
        if missing:
            raise ConfigError(f"coefficient table {path} is missing classes: {missing}")
        c = np.array([values[k] for k in range(N_CLASSES)])
        return cls(c, intensity_mm_per_hr)


@dataclass(frozen=True)
class RunoffResult:
    total_m3_per_s: float
    per_class_m3_per_s: np.ndarray  # shape (7,)
    composite_c: float


def composite_coefficient(hist: np.ndarray, table: CoefficientTable) -> float:
    """Count-weighted mean coefficient; lies in [min c, max c]."""
    hist = np.asarray(hist, dtype=np.float64)
    total = hist.sum()
    if total <= 0:
        raise EmptyGrid("histogram is empty; composite coefficient undefined")
    return float(np.dot(table.c, hist) / total)


def runoff_from_histogram(hist: np.ndarray, cell_area_m2: float, table: CoefficientTable) -> RunoffResult:
    hist = np.asarray(hist, dtype=np.int64)
    composite = composite_coefficient(hist, table)
    total_area = cell_area_m2 * int(hist.sum())
    total = composite * table.intensity_mm_per_hr * total_area * MM_HR_TO_M_S
    per_class = table.c * hist * cell_area_m2 * table.intensity_mm_per_hr * MM_HR_TO_M_S
    return RunoffResult(total, per_class, composite)


def compute_runoff(grid: LulcGrid, table: CoefficientTable) -> RunoffResult:
    """Rational-method runoff of a grid via its class histogram."""
    return runoff_from_histogram(class_histogram(grid), grid.cell_area_m2, table)
