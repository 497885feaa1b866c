"""Delimited report files plus the rendered comparison figure.

Outputs are stable, documented formats:
  comparison.csv  header ``label,runoff_m3_per_s``, one row per labeled value
  transition.csv  header ``from,water,urban,barren,forest,grassland,agriculture,wetland,total``
  comparison.svg  static bar chart, one identifiable bar per labeled value
"""

from __future__ import annotations

import os
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .errors import LulcPpoError
from .evaluate import ComparisonReport, TransitionMatrix
from .grid import CLASS_NAMES
from .persistence import atomic_write_text

BAR_COLOR = "#4878a8"
OPTIMIZED_COLOR = "#3f8f4f"


def comparison_csv_text(report: ComparisonReport) -> str:
    lines = ["label,runoff_m3_per_s"]
    for label, value in zip(report.labels, report.runoff_m3_per_s):
        lines.append(f"{label},{value!r}")
    return "\n".join(lines) + "\n"


def transition_csv_text(matrix: TransitionMatrix) -> str:
    lines = ["from," + ",".join(CLASS_NAMES) + ",total"]
    for k, name in enumerate(CLASS_NAMES):
        row = matrix.counts[k]
        lines.append(f"{name}," + ",".join(str(int(v)) for v in row) + f",{int(row.sum())}")
    return "\n".join(lines) + "\n"


def render_comparison_svg(report: ComparisonReport, path) -> None:
    """Bar chart of the labeled runoff values; each bar carries a
    ``bar-<label>`` gid so the SVG stays machine-checkable."""
    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    xs = range(len(report.labels))
    bars = ax.bar(xs, report.runoff_m3_per_s, color=BAR_COLOR)
    for label, bar in zip(report.labels, bars):
        bar.set_gid(f"bar-{label}")
        if label == "optimized":
            bar.set_color(OPTIMIZED_COLOR)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(report.labels, rotation=30, ha="right")
    ax.set_ylabel("runoff [m^3/s]")
    ax.set_title("Surface runoff by land-management option")
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp.svg")
    try:
        fig.savefig(tmp, format="svg")
        os.replace(tmp, path)
    finally:
        plt.close(fig)
        if tmp.exists():
            tmp.unlink()


def emit_reports(report: ComparisonReport, matrix: TransitionMatrix, out_dir) -> list:
    """Write comparison.csv, transition.csv and comparison.svg; returns the
    written paths."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        comparison = out_dir / "comparison.csv"
        transition = out_dir / "transition.csv"
        figure = out_dir / "comparison.svg"
        atomic_write_text(comparison, comparison_csv_text(report))
        atomic_write_text(transition, transition_csv_text(matrix))
        render_comparison_svg(report, figure)
    except OSError as exc:
        raise LulcPpoError(f"failed writing reports to {out_dir}: {exc}") from exc
    return [comparison, transition, figure]
