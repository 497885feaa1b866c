"""Bundled 25x40 starting grid.

Class totals are fixed at water 5, urban 93, barren 4, forest 30,
grassland 138, agriculture 718, wetland 12 (1000 pixels, 900 m^2 each);
the spatial arrangement is a synthetic deterministic shuffle. Urban and
wetland pixels are frozen.
"""

from __future__ import annotations

import numpy as np

from .environment import DEFAULT_FROZEN_CLASSES
from .grid import N_CLASSES, LulcGrid, frozen_mask_from_classes
from .rng import Xoshiro256StarStar

SEED_GRID_WIDTH = 25
SEED_GRID_HEIGHT = 40
SEED_GRID_CELL_AREA_M2 = 900.0
SEED_GRID_COUNTS = (5, 93, 4, 30, 138, 718, 12)

_LAYOUT_SEED = 0x5EED_6E1D  # fixed; the arrangement is part of the artifact


def make_seed_grid() -> LulcGrid:
    """Deterministic bundled grid; repeated calls are identical."""
    cells = np.repeat(np.arange(N_CLASSES, dtype=np.int64), SEED_GRID_COUNTS)
    rng = Xoshiro256StarStar(_LAYOUT_SEED)
    rng.shuffle(cells)
    grid = LulcGrid(SEED_GRID_WIDTH, SEED_GRID_HEIGHT, cells, SEED_GRID_CELL_AREA_M2)
    return grid.with_frozen(frozen_mask_from_classes(grid, DEFAULT_FROZEN_CLASSES))
