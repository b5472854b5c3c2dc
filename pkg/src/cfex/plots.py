"""Figure rendering for CLI reports. All output goes to files (Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .analysis import ChangeFrequencyReport, KdeCurve

_PNG_METADATA = {"Software": None}  # keep savefig byte-reproducible run to run


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def plot_change_frequency(report: ChangeFrequencyReport, path: str | Path) -> None:
    """Horizontal bar chart of per-feature change counts, most-changed on top."""
    pairs = report.sorted_counts()
    names = [p[0] for p in pairs][::-1]
    counts = [p[1] for p in pairs][::-1]
    fig, ax = plt.subplots(figsize=(7, 0.32 * max(len(names), 6) + 1.2))
    ax.barh(names, counts, color="#4878d0")
    ax.set_xlabel("changes")
    ax.set_title(
        f"{report.source_class} to {report.target_class}: "
        f"{report.n_counterfactuals} counterfactuals from {report.n_patients} patients"
    )
    fig.tight_layout()
    _save(fig, path)


def plot_kde_layers(
    curves: Mapping[str, KdeCurve], feature: str, path: str | Path
) -> None:
    """Layered density curves (one per class/group) for a single feature."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label in curves:
        curve = curves[label]
        ax.plot(curve.grid, curve.density, label=label, linewidth=1.6)
        ax.fill_between(curve.grid, curve.density, alpha=0.18)
    ax.set_xlabel(feature)
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)


def plot_metric_bars(
    rows: Sequence[tuple[str, Mapping[str, Mapping[str, float]]]], path: str | Path
) -> None:
    """Grouped bars with error whiskers: one group per scenario row, one bar
    per macro metric."""
    metrics = ("macro_precision", "macro_recall", "macro_f1")
    width = 0.25
    fig, ax = plt.subplots(figsize=(1.8 * max(len(rows), 2) + 2.5, 4.2))
    for m_idx, metric in enumerate(metrics):
        xs = [i + (m_idx - 1) * width for i in range(len(rows))]
        means = [row[1][metric]["mean"] for row in rows]
        stds = [row[1][metric]["std"] for row in rows]
        ax.bar(xs, means, width=width, yerr=stds, capsize=3, label=metric.replace("macro_", ""))
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([row[0] for row in rows])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("macro score")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
