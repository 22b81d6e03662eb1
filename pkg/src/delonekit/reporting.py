"""Report rendering: delimited measure tables plus matplotlib figures.

The report pipeline writes a CSV of per-rectangle measure rows, a JSON
summary, and PNG figures (patch scatters and the per-level discrepancy
chart) alongside each other in one output directory.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

from .geometry import PointSet

CSV_COLUMNS = ["level", "rect_id", "mu", "nu", "integral", "abs_error"]


def write_measures_csv(rows: Sequence[dict], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in CSV_COLUMNS})


def _matplotlib():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def save_pointset_figure(ps: PointSet, path, title: str = "") -> Path:
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6, 6))
    xs = [float(x) for x, _ in ps.fractions()]
    ys = [float(y) for _, y in ps.fractions()]
    size = max(0.2, 36.0 / max(1, len(ps) ** 0.5))
    ax.scatter(xs, ys, s=size, marker="s", color="black", linewidths=0)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_discrepancy_figure(levels: Sequence[int], series: dict, path,
                            title: str = "sup discrepancy per level") -> Path:
    """``series`` maps a label to one value per level."""
    plt = _matplotlib()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, values in sorted(series.items()):
        ax.plot(list(levels), [float(v) for v in values], marker="o", label=label)
    ax.set_xlabel("level side length")
    ax.set_ylabel("sup |mu - integral|")
    ax.set_yscale("log")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
