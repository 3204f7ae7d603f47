"""ROC figure rendering: one panel per window length, saved as SVG."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .errors import IoFailureError  # noqa: E402

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RocTrace:
    model: str
    window_minutes: int
    fpr: np.ndarray
    tpr: np.ndarray
    auc: float


def build_roc_figure(traces: list[RocTrace]) -> "plt.Figure":
    """One labeled line per model, one panel per window, chance diagonal."""
    by_window: dict[int, list[RocTrace]] = {}
    for trace in traces:
        by_window.setdefault(trace.window_minutes, []).append(trace)
    windows = sorted(w for w, group in by_window.items() if group)
    if not windows:
        raise ValueError("no ROC curves to plot")
    ncols = min(3, len(windows))
    nrows = math.ceil(len(windows) / ncols)
    fig, axes = plt.subplots(
        nrows, ncols, figsize=(4.0 * ncols, 3.6 * nrows), squeeze=False
    )
    for ax in axes.flat:
        ax.set_visible(False)
    for i, window in enumerate(windows):
        ax = axes.flat[i]
        ax.set_visible(True)
        ax.plot([0, 1], [0, 1], linestyle="--", color="grey", linewidth=0.8)
        for trace in by_window[window]:
            ax.plot(
                trace.fpr,
                trace.tpr,
                linewidth=1.2,
                label=f"{trace.model} (AUC={trace.auc:.3f})",
            )
        ax.set_xlim(0, 1)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("False positive rate")
        ax.set_ylabel("True positive rate")
        ax.set_title(f"{window} min windows")
        ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    return fig


def render_roc_svg(
    traces: list[RocTrace],
    path: Path,
    expected_windows: list[int] | None = None,
) -> None:
    """Render the grouped ROC panels to an SVG file, deterministically.

    Expected windows with no valid curve are omitted with a warning.
    """
    windows_present = {t.window_minutes for t in traces}
    for window in sorted(set(expected_windows or ()) - windows_present):
        log.warning("window %d min has no curves; panel omitted", window)
    fig = build_roc_figure(traces)
    try:
        with matplotlib.rc_context({"svg.hashsalt": "limbsense"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)


def render_scatter_svg(
    x: np.ndarray,
    y: np.ndarray,
    path: Path,
    xlabel: str,
    ylabel: str,
    title: str,
) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    ax.scatter(x, y, s=18)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    fig.tight_layout()
    try:
        with matplotlib.rc_context({"svg.hashsalt": "limbsense"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    except OSError as exc:
        raise IoFailureError(f"cannot write {path}: {exc}") from exc
    finally:
        plt.close(fig)
