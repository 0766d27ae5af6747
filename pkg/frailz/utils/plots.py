"""
SVG views of residual diagnostics and simulation summaries.

Every figure is written next to a CSV holding exactly the plotted coordinates.
matplotlib is imported on first use with the Agg backend; a fixed hash salt and
no date metadata keep repeated runs byte-identical.
"""

from __future__ import annotations

import logging
import os
from typing import List, Sequence

import numpy as np
import pandas as pd

from frailz.constants import CSV_FLOAT_FORMAT, NA_REP, SW_ALPHA
from frailz.diagnostics.stats import Coordinates
from frailz.residuals.ResidualSet import ResidualSet

logger = logging.getLogger("frailz.plots")

EVENT_COLOUR = "tab:green"
CENSORED_COLOUR = "tab:blue"


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "frailz"
    plt.rcParams["svg.fonttype"] = "none"
    return plt


def _write(fig, frame: pd.DataFrame, svg_path: str) -> List[str]:
    plt = _pyplot()
    csv_path = os.path.splitext(svg_path)[0] + ".csv"
    try:
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    frame.to_csv(
        csv_path, index=False, na_rep=NA_REP, float_format=CSV_FLOAT_FORMAT, lineterminator="\n"
    )
    logger.debug("Wrote %s and %s", svg_path, csv_path)
    return [svg_path, csv_path]


def residual_scatter(residuals: ResidualSet, svg_path: str, threshold: float = 3.0) -> List[str]:
    """Z-residuals against observation index, events green and censored blue, with ±threshold guides."""
    plt = _pyplot()
    valid = residuals.valid
    index = np.arange(1, len(residuals) + 1)[valid]
    z = residuals.z[valid]
    event = np.asarray(residuals.status)[valid] == 1

    fig, ax = plt.subplots(figsize=(7, 4))
    ax.scatter(index[event], z[event], s=12, color=EVENT_COLOUR, label="event")
    ax.scatter(index[~event], z[~event], s=12, color=CENSORED_COLOUR, label="censored")
    for level in (-threshold, threshold):
        ax.axhline(level, color="grey", linestyle="--", linewidth=0.8)
    for i, zi, row in zip(index, z, residuals.row_ids[valid]):
        if abs(zi) > threshold:
            ax.annotate(str(row), (i, zi), textcoords="offset points", xytext=(3, 3), fontsize=8)
    ax.set_xlabel("Index")
    ax.set_ylabel("Z-residual")
    ax.set_title(f"{residuals.regime.label} Z-residuals")
    ax.legend(loc="best", fontsize=8)

    frame = pd.DataFrame(
        {
            "index": index,
            "row_id": residuals.row_ids[valid],
            "z": z,
            "status": event.astype(int),
        }
    )
    return _write(fig, frame, svg_path)


def qq_plot(coords: Coordinates, svg_path: str, title: str = "Normal QQ plot") -> List[str]:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(coords.x, coords.y, s=10, color=CENSORED_COLOUR)
    if coords.x.size:
        lo = float(min(coords.x.min(), coords.y.min()))
        hi = float(max(coords.x.max(), coords.y.max()))
        ax.plot([lo, hi], [lo, hi], color="red", linewidth=1)
    ax.set_xlabel("Theoretical quantiles")
    ax.set_ylabel("Sample quantiles")
    ax.set_title(title)
    frame = pd.DataFrame({"theoretical": coords.x, "empirical": coords.y})
    return _write(fig, frame, svg_path)


def sw_histogram(p_values: Sequence[float], svg_path: str) -> List[str]:
    """Histogram of replicated Shapiro–Wilk p-values with the 0.05 cut-off marked."""
    plt = _pyplot()
    p = np.asarray(p_values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(p[np.isfinite(p)], bins=np.linspace(0.0, 1.0, 21), color=CENSORED_COLOUR)
    ax.axvline(SW_ALPHA, color="red", linestyle="--", linewidth=1)
    ax.set_xlim(0.0, 1.0)
    ax.set_xlabel("Shapiro-Wilk p-value")
    ax.set_ylabel("Replicates")
    frame = pd.DataFrame({"replicate": np.arange(1, p.size + 1), "sw_p": p})
    return _write(fig, frame, svg_path)


def cs_chf_plot(coords: Coordinates, svg_path: str) -> List[str]:
    """Nelson–Aalen CHF of Cox–Snell residuals against the unit-slope reference."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.step(coords.x, coords.y, where="post", color=CENSORED_COLOUR)
    if coords.x.size:
        hi = float(max(coords.x.max(), coords.y.max()))
        ax.plot([0.0, hi], [0.0, hi], color="red", linewidth=1)
    ax.set_xlabel("Cox-Snell residual")
    ax.set_ylabel("Cumulative hazard")
    frame = pd.DataFrame({"cs": coords.x, "chf": coords.y})
    return _write(fig, frame, svg_path)


def experiment_curve(table: pd.DataFrame, metric: str, svg_path: str) -> List[str]:
    """One line per (regime, model) of ``metric`` against sample size."""
    plt = _pyplot()
    rows = table[table["metric"] == metric].sort_values(["regime", "model", "n"], kind="stable")
    fig, ax = plt.subplots(figsize=(6, 4))
    for (regime, model), group in rows.groupby(["regime", "model"], sort=False):
        ax.plot(group["n"], group["value"], marker="o", label=f"{regime}, {model}")
    ax.set_xlabel("n")
    ax.set_ylabel(metric)
    if metric in ("rejection_rate", "auc", "sensitivity", "fpr"):
        ax.set_ylim(-0.02, 1.02)
    if len(rows):
        ax.legend(loc="best", fontsize=7)
    frame = rows[["n", "regime", "model", "value", "mc_se"]]
    return _write(fig, frame, svg_path)
