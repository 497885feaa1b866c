"""Land-cover grid representation and the CSV raster format.

A grid is a row-major raster of class-coded cells with one uniform cell
area and a per-pixel frozen mask. Seven classes are modeled:

    0 water, 1 urban, 2 barren, 3 forest, 4 grassland, 5 agriculture, 6 wetland

CSV raster format: a header line ``width,height,cell_area_m2`` followed by
``height`` lines of ``width`` comma-separated class codes. The frozen-mask
file has the same shape with 0/1 entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

N_CLASSES = 7

WATER, URBAN, BARREN, FOREST, GRASSLAND, AGRICULTURE, WETLAND = range(N_CLASSES)

CLASS_NAMES = ("water", "urban", "barren", "forest", "grassland", "agriculture", "wetland")
CLASS_CODES = {name: code for code, name in enumerate(CLASS_NAMES)}


def class_code(name: str) -> int:
    try:
        return CLASS_CODES[name.strip().lower()]
    except KeyError:
        raise ConfigError(f"unknown land-cover class {name!r}; expected one of {CLASS_NAMES}") from None


@dataclass
class LulcGrid:
    """Raster of class codes plus a frozen mask.

    ``cells`` is mutable (the environment rewrites pixels on its working
    copy); ``frozen`` is made read-only at construction and stays fixed for
    the life of the grid.
    """

    width: int
    height: int
    cells: np.ndarray
    cell_area_m2: float
    frozen: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.cells = np.ascontiguousarray(self.cells, dtype=np.int64).reshape(-1)
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"grid dimensions must be positive, got {self.width}x{self.height}")
        if self.cells.size != self.width * self.height:
            raise ValueError(
                f"cell count {self.cells.size} does not match {self.width}x{self.height}"
            )
        if self.cells.min() < 0 or self.cells.max() >= N_CLASSES:
            raise ValueError("class codes must be in 0..6")
        if not self.cell_area_m2 > 0:
            raise ValueError(f"cell_area_m2 must be positive, got {self.cell_area_m2}")
        if self.frozen is None:
            self.frozen = np.zeros(self.cells.size, dtype=bool)
        else:
            self.frozen = np.ascontiguousarray(self.frozen, dtype=bool).reshape(-1)
            if self.frozen.size != self.cells.size:
                raise ValueError("frozen mask size does not match cell count")
        self.frozen.setflags(write=False)

    @property
    def n_pixels(self) -> int:
        return self.cells.size

    @property
    def total_area_m2(self) -> float:
        return self.cell_area_m2 * self.n_pixels

    def copy(self) -> "LulcGrid":
        return LulcGrid(self.width, self.height, self.cells.copy(), self.cell_area_m2, self.frozen)

    def with_frozen(self, frozen: np.ndarray) -> "LulcGrid":
        return LulcGrid(self.width, self.height, self.cells.copy(), self.cell_area_m2, frozen)


def class_histogram(grid: LulcGrid) -> np.ndarray:
    """Per-class pixel counts, shape (7,), summing to the pixel total."""
    return np.bincount(grid.cells, minlength=N_CLASSES).astype(np.int64)


def frozen_mask_from_classes(grid: LulcGrid, frozen_classes) -> np.ndarray:
    """Mask marking every pixel whose class is in ``frozen_classes``."""
    mask = np.zeros(grid.n_pixels, dtype=bool)
    for code in frozen_classes:
        mask |= grid.cells == code
    return mask


def write_grid_csv(grid: LulcGrid, path) -> None:
    path = Path(path)
    lines = [f"{grid.width},{grid.height},{grid.cell_area_m2!r}"]
    rows = grid.cells.reshape(grid.height, grid.width)
    for row in rows:
        lines.append(",".join(str(int(c)) for c in row))
    path.write_text("\n".join(lines) + "\n")


def read_grid_csv(path, frozen: np.ndarray | None = None) -> LulcGrid:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"grid file not found: {path}")
    lines = path.read_text().splitlines()
    if not lines:
        raise ConfigError(f"grid file is empty: {path}")
    header = lines[0].split(",")
    if len(header) != 3:
        raise ConfigError(f"grid header must be 'width,height,cell_area_m2', got {lines[0]!r} in {path}")
    try:
        width, height, area = int(header[0]), int(header[1]), float(header[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid header in {path}: {exc}") from None
    body = lines[1:]
    if len(body) != height:
        raise ConfigError(f"grid file {path} has {len(body)} data rows, expected {height}")
    try:
        cells = np.array([[int(v) for v in line.split(",")] for line in body], dtype=np.int64)
    except ValueError as exc:
        raise ConfigError(f"bad cell value in {path}: {exc}") from None
    if cells.shape != (height, width):
        raise ConfigError(f"grid file {path} rows are not uniformly {width} wide")
    try:
        return LulcGrid(width, height, cells.reshape(-1), area, frozen)
    except ValueError as exc:
        raise ConfigError(f"invalid grid in {path}: {exc}") from None


def write_mask_csv(grid: LulcGrid, path) -> None:
    path = Path(path)
    lines = [f"{grid.width},{grid.height},{grid.cell_area_m2!r}"]
    rows = grid.frozen.astype(np.int64).reshape(grid.height, grid.width)
    for row in rows:
        lines.append(",".join(str(int(c)) for c in row))
    path.write_text("\n".join(lines) + "\n")


def read_mask_csv(path, expect_shape: tuple[int, int] | None = None) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"frozen-mask file not found: {path}")
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    width, height = int(header[0]), int(header[1])
    if expect_shape is not None and (width, height) != expect_shape:
        raise ConfigError(
            f"frozen mask {path} is {width}x{height}, grid is {expect_shape[0]}x{expect_shape[1]}"
        )
    values = np.array([[int(v) for v in line.split(",")] for line in lines[1:]], dtype=np.int64)
    if values.shape != (height, width):
        raise ConfigError(f"frozen mask {path} rows are not uniformly {width} wide")
    if not np.isin(values, (0, 1)).all():
        raise ConfigError(f"frozen mask {path} must contain only 0/1 entries")
    return values.reshape(-1).astype(bool)
