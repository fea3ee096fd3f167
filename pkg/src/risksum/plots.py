"""Figure rendering for the analyze report.

Uses the Agg backend and fixed metadata so repeated runs with the same
inputs produce byte-identical image files.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from risksum.evaluation import LevelRatioStats, PrecisionCorrelationRow

_PNG_METADATA = {"Software": "risksum"}


def _boxplot_panel(ax, stats: LevelRatioStats, title: str) -> None:
    boxes = []
    for row in stats.rows:
        q = row.quartiles
        boxes.append(
            {
                "label": f"{row.level.value}\n(n={row.n_users})",
                "whislo": q.minimum,
                "q1": q.q1,
                "med": q.median,
                "q3": q.q3,
                "whishi": q.maximum,
                "fliers": [],
            }
        )
    if boxes:
        ax.bxp(boxes, showfliers=False)
    ax.set_ylim(-0.05, 1.05)
    ax.set_ylabel("per-user sentence ratio")
    ax.set_title(title)


def render_level_ratio_figure(
    risk_stats: LevelRatioStats,
    negative_stats: LevelRatioStats,
    path: str | Path,
) -> None:
    """Two box-plot panels: risk-positive and negative-dominant ratios
    per expert level."""
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))
    _boxplot_panel(axes[0], risk_stats, "Risk-positive sentences")
    _boxplot_panel(axes[1], negative_stats, "Negative-sentiment sentences")
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)


def render_precision_correlation_figure(
    rows: Sequence[PrecisionCorrelationRow], path: str | Path
) -> None:
    """Mean probabilities and ≥0.9 fractions against precision-bin
    midpoints; empty bins are skipped."""
    filled = [row for row in rows if row.n > 0]
    midpoints = [(row.precision_low + row.precision_high) / 2 for row in filled]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 4.0))

    axes[0].plot(
        midpoints, [row.mean_risk_prob for row in filled], "o-", label="risk"
    )
    axes[0].plot(
        midpoints,
        [row.mean_negative_prob for row in filled],
        "s--",
        label="negative sentiment",
    )
    axes[0].set_ylabel("mean probability")
    axes[0].set_title("Mean probability by precision bin")

    axes[1].plot(
        midpoints, [row.frac_risk_above_0_9 for row in filled], "o-", label="risk"
    )
    axes[1].plot(
        midpoints,
        [row.frac_negative_above_0_9 for row in filled],
        "s--",
        label="negative sentiment",
    )
    axes[1].set_ylabel("fraction with probability >= 0.9")
    axes[1].set_title("High-probability fraction by precision bin")

    for ax in axes:
        ax.set_xlabel("highlight precision (bin midpoint)")
        ax.set_xlim(0.0, 1.0)
        ax.set_ylim(-0.05, 1.05)
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_PNG_METADATA)
    plt.close(fig)
