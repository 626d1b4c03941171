"""Figures written by the CLI report paths (SVG via matplotlib's Agg stack)."""

from __future__ import annotations

from contextlib import contextmanager
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
    "figure.figsize": (4.2, 3.0),
}


@contextmanager
def _style(deterministic: bool):
    rc = dict(STYLE)
    if deterministic:
        rc["svg.hashsalt"] = "bvpgaf"
    with plt.rc_context(rc):
        yield


def _save(fig, path: Path, deterministic: bool) -> Path:
    path = Path(path)
    meta = {"Date": None} if deterministic else {}
    fig.savefig(path, format="svg", metadata=meta)
    plt.close(fig)
    return path


def accuracy_curves(path, train_acc: Sequence[float], val_acc: Sequence[float], title: str,
                    test_acc: float | None = None, deterministic: bool = False) -> Path:
    """Train/validation accuracy against epoch for one sweep cell."""
    with _style(deterministic):
        fig, ax = plt.subplots()
        epochs = np.arange(1, len(train_acc) + 1)
        ax.plot(epochs, train_acc, label="train")
        ax.plot(epochs, val_acc, label="validation", linestyle="--")
        if test_acc is not None:
            title = f"{title}. Test acc = {test_acc:.4f}"
        ax.set_title(title)
        ax.set_xlabel("epoch")
        ax.set_ylabel("accuracy")
        ax.set_ylim(0, 1.02)
        ax.legend(loc="lower right", frameon=False)
        fig.tight_layout()
        return _save(fig, path, deterministic)


def accuracy_vs_effective_length(path, rows: Sequence[dict], deterministic: bool = False) -> Path:
    """Test accuracy per variant against effective length (stride / window)."""
    with _style(deterministic):
        fig, ax = plt.subplots()
        for variant in sorted({r["variant"] for r in rows}):
            pts = sorted((r["effective_length"], r["test_accuracy"]) for r in rows
                         if r["variant"] == variant and r["test_accuracy"] is not None)
            if pts:
                x, y = zip(*pts)
                ax.plot(x, y, marker="o", label=variant)
        ax.axhline(0.25, color="0.6", linewidth=0.8, linestyle=":", label="chance")
        ax.set_xlabel("effective length j/p")
        ax.set_ylabel("test accuracy")
        ax.set_ylim(0, 1.02)
        ax.legend(frameon=False)
        fig.tight_layout()
        return _save(fig, path, deterministic)


def main_effects(path, rows: Sequence[dict], deterministic: bool = False) -> Path:
    """Group means per perceived feature, one panel per feature.

    ``rows`` entries carry ``feature``, ``group`` and ``mean``.
    """
    features = list(dict.fromkeys(r["feature"] for r in rows))
    with _style(deterministic):
        fig, axes = plt.subplots(1, len(features), figsize=(1.9 * len(features), 2.4), sharey=True, squeeze=False)
        for ax, feat in zip(axes[0], features):
            sub = [r for r in rows if r["feature"] == feat]
            ax.plot([r["group"] for r in sub], [r["mean"] for r in sub], marker="o")
            ax.set_title(feat)
            ax.set_xlabel("condition")
        axes[0][0].set_ylabel("mean score")
        fig.tight_layout()
        return _save(fig, path, deterministic)


def gaf_gallery(path, images: Sequence[np.ndarray], titles: Sequence[str], deterministic: bool = False) -> Path:
    """One example field image per class."""
    with _style(deterministic):
        fig, axes = plt.subplots(1, len(images), figsize=(1.8 * len(images), 2.0), squeeze=False)
        for ax, img, title in zip(axes[0], images, titles):
            ax.imshow(img, cmap="RdBu_r", vmin=-1, vmax=1, interpolation="nearest")
            ax.set_title(title)
            ax.set_xticks([])
            ax.set_yticks([])
        fig.tight_layout()
        return _save(fig, path, deterministic)
