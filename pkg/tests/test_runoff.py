"""Runoff math against a per-pixel brute-force oracle.

The oracle sums coefficient * intensity * cell_area / 3.6e6 one pixel at a
time in plain Python, independent of the histogram-based production path.
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lulc_ppo.errors import ConfigError, EmptyGrid
from lulc_ppo.grid import AGRICULTURE, WETLAND, LulcGrid, class_histogram
from lulc_ppo.runoff import (
    CoefficientTable,
    composite_coefficient,
    compute_runoff,
    runoff_from_histogram,
)
from lulc_ppo.seed_grid import make_seed_grid


def per_pixel_runoff_oracle(grid: LulcGrid, table: CoefficientTable) -> float:
    total = 0.0
    for code in grid.cells:
        total += table.c[int(code)] * table.intensity_mm_per_hr * grid.cell_area_m2 / 3.6e6
    return total


def per_pixel_composite_oracle(grid: LulcGrid, table: CoefficientTable) -> float:
    acc = 0.0
    for code in grid.cells:
        acc += table.c[int(code)]
    return acc / grid.n_pixels


@pytest.fixture
def table():
    return CoefficientTable.default()


def random_grid(rng) -> LulcGrid:
    w = int(rng.integers(1, 30))
    h = int(rng.integers(1, 30))
    cells = rng.integers(0, 7, size=w * h)
    area = float(rng.uniform(1.0, 5000.0))
    return LulcGrid(w, h, cells, area)


def test_composite_uniform_wetland(table):
    hist = np.array([0, 0, 0, 0, 0, 0, 100])
    assert composite_coefficient(hist, table) == pytest.approx(0.05, abs=0, rel=1e-15)


def test_composite_two_class_average(table):
    hist = np.zeros(7, dtype=int)
    hist[AGRICULTURE] = 1
    hist[WETLAND] = 1
    assert composite_coefficient(hist, table) == pytest.approx(0.225, rel=1e-15)


def test_composite_of_seed_grid_matches_per_pixel_oracle(table):
    grid = make_seed_grid()
    expected = per_pixel_composite_oracle(grid, table)
    got = composite_coefficient(class_histogram(grid), table)
    assert got == pytest.approx(expected, rel=1e-12)


def test_composite_empty_histogram_rejected(table):
    with pytest.raises(EmptyGrid):
        composite_coefficient(np.zeros(7, dtype=int), table)


def test_all_wetland_runoff_hand_value(table):
    grid = LulcGrid(25, 40, np.full(1000, WETLAND), 900.0)
    result = compute_runoff(grid, table)
    # 0.05 * 10 mm/hr * 900000 m^2 / 3.6e6
    assert result.total_m3_per_s == pytest.approx(0.125, rel=1e-12)


def test_zero_intensity_gives_zero_runoff():
    dry = CoefficientTable.default(intensity_mm_per_hr=0.0)
    grid = make_seed_grid()
    assert compute_runoff(grid, dry).total_m3_per_s == 0.0


def test_negative_intensity_rejected():
    with pytest.raises(ConfigError):
        CoefficientTable.default(intensity_mm_per_hr=-1.0)


def test_seed_grid_runoff_matches_per_pixel_oracle(table):
    grid = make_seed_grid()
    expected = per_pixel_runoff_oracle(grid, table)
    got = compute_runoff(grid, table).total_m3_per_s
    assert got == pytest.approx(expected, rel=1e-12)


def test_total_equals_sum_of_per_class_contributions(table):
    grid = make_seed_grid()
    result = compute_runoff(grid, table)
    assert result.total_m3_per_s == pytest.approx(result.per_class_m3_per_s.sum(), rel=1e-12)


def test_two_path_equality_on_random_grids(table):
    rng = np.random.default_rng(1234)
    for _ in range(200):
        grid = random_grid(rng)
        expected = per_pixel_runoff_oracle(grid, table)
        got = compute_runoff(grid, table).total_m3_per_s
        assert got == pytest.approx(expected, rel=1e-12)


def test_single_pixel_rewrite_to_lower_coefficient_strictly_reduces(table):
    grid = make_seed_grid().copy()
    idx = int(np.flatnonzero(grid.cells == AGRICULTURE)[0])
    before = compute_runoff(grid, table).total_m3_per_s
    grid.cells[idx] = WETLAND
    after = compute_runoff(grid, table).total_m3_per_s
    assert after < before


@given(counts=st.lists(st.integers(0, 10_000), min_size=7, max_size=7))
@settings(max_examples=300, deadline=None)
def test_composite_bounded_by_table_extremes(counts):
    hist = np.array(counts)
    table = CoefficientTable.default()
    if hist.sum() == 0:
        with pytest.raises(EmptyGrid):
            composite_coefficient(hist, table)
        return
    c = composite_coefficient(hist, table)
    assert table.c.min() - 1e-15 <= c <= table.c.max() + 1e-15


@given(
    codes=st.lists(st.integers(0, 6), min_size=1, max_size=200),
    area=st.floats(1e-3, 1e6, allow_nan=False, allow_infinity=False),
    intensity=st.floats(1e-6, 500.0, allow_nan=False, allow_infinity=False),
)
@settings(max_examples=300, deadline=None)
def test_histogram_path_equals_per_pixel_path(codes, area, intensity):
    grid = LulcGrid(len(codes), 1, np.array(codes), area)
    table = CoefficientTable.default(intensity_mm_per_hr=intensity)
    expected = per_pixel_runoff_oracle(grid, table)
    got = compute_runoff(grid, table).total_m3_per_s
    assert got == pytest.approx(expected, rel=1e-12)


def test_coefficient_table_validation():
    with pytest.raises(ConfigError):
        CoefficientTable(np.array([0.9, 0.8, 0.6, 0.2, 0.3, 0.4, 1.5]), 10.0)  # out of range
    with pytest.raises(ConfigError):
        # wetland not the strict minimum
        CoefficientTable(np.array([0.9, 0.8, 0.6, 0.05, 0.3, 0.4, 0.05]), 10.0)


def test_coefficient_table_from_csv(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text(
        "class_name,coefficient\n"
        "water,0.9\nurban,0.8\nbarren,0.5\nforest,0.2\ngrassland,0.3\nagriculture,0.4\nwetland,0.01\n"
    )
    table = CoefficientTable.from_csv(p, 12.0)
    assert table.c[WETLAND] == 0.01
    assert table.intensity_mm_per_hr == 12.0
    missing = tmp_path / "m.csv"
    missing.write_text("class_name,coefficient\nwater,0.9\n")
    with pytest.raises(ConfigError):
        CoefficientTable.from_csv(missing, 12.0)


def test_runoff_from_histogram_matches_grid_path(table):
    grid = make_seed_grid()
    a = compute_runoff(grid, table)
    b = runoff_from_histogram(class_histogram(grid), grid.cell_area_m2, table)
    assert a.total_m3_per_s == b.total_m3_per_s
    assert np.array_equal(a.per_class_m3_per_s, b.per_class_m3_per_s)
