"""Rendering of report figures and visual previews.

Figures are written straight to files (headless Agg backend) next to the
delimited outputs of the eval subcommands, so a run leaves both the
machine-readable numbers and the pictures a human wants to glance at.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from scipy import ndimage  # noqa: E402

from PIL import Image  # noqa: E402

__all__ = [
    "roc_points",
    "pr_points",
    "save_roc_figure",
    "save_pr_figure",
    "save_dice_histogram",
    "save_overlay",
]


def roc_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """(FPR, TPR) step points over descending thresholds, ties grouped."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    n_pos = max(int(y.sum()), 1)
    n_neg = max(int(y.size - y.sum()), 1)
    distinct = np.nonzero(np.diff(s))[0]
    cut = np.concatenate([distinct, [s.size - 1]])
    tp = np.cumsum(y)[cut]
    fp = cut + 1 - tp
    tpr = np.concatenate([[0.0], tp / n_pos])
    fpr = np.concatenate([[0.0], fp / n_neg])
    return fpr, tpr


def pr_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """(recall, precision) step points over descending thresholds."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    n_pos = max(int(y.sum()), 1)
    distinct = np.nonzero(np.diff(s))[0]
    cut = np.concatenate([distinct, [s.size - 1]])
    tp = np.cumsum(y)[cut]
    recall = tp / n_pos
    precision = tp / (cut + 1)
    return recall, precision


def save_roc_figure(scores, labels, path, auc_value: float | None = None) -> None:
    fpr, tpr = roc_points(scores, labels)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(fpr, tpr, drawstyle="steps-post", color="tab:blue")
    ax.plot([0, 1], [0, 1], ls="--", lw=0.8, color="gray")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    title = "ROC" if auc_value is None else f"ROC (AUC = {auc_value:.4f})"
    ax.set_title(title)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_pr_figure(scores, labels, path, ap_value: float | None = None) -> None:
    recall, precision = pr_points(scores, labels)
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    ax.plot(recall, precision, drawstyle="steps-post", color="tab:orange")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    title = "Precision-recall" if ap_value is None else f"Precision-recall (AP = {ap_value:.4f})"
    ax.set_title(title)
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_dice_histogram(values, path, mean_value: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.5))
    ax.hist(np.asarray(values, dtype=np.float64), bins=20, range=(0.0, 1.0),
            color="tab:green", edgecolor="black", linewidth=0.5)
    if mean_value is not None:
        ax.axvline(mean_value, color="black", ls="--", lw=1.0,
                   label=f"mean = {mean_value:.4f}")
        ax.legend()
    ax.set_xlabel("Dice")
    ax.set_ylabel("images")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_overlay(image: np.ndarray, mask: np.ndarray, path) -> None:
    """Write an RGB preview with the mask boundary drawn in red."""
    gray = np.round(np.clip(image, 0.0, 1.0) * 255.0).astype(np.uint8)
    rgb = np.stack([gray, gray, gray], axis=-1)
    fg = np.asarray(mask) > 0
    boundary = fg & ~ndimage.binary_erosion(fg, border_value=0)
    rgb[boundary] = (255, 0, 0)
    Image.fromarray(rgb, mode="RGB").save(path)
