"""Human- and machine-readable evaluation output.

The text table mirrors the usual confusion-matrix layout: one row per
true class, prediction counts across, a per-class accuracy column with
two decimals, and an overall accuracy line. The CSV keeps the counts
only. Figures render through the Agg backend so report generation works
headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .classify import ConfusionMatrix
from .pipeline import Segmentation


def format_confusion_table(cm: ConfusionMatrix) -> str:
    """Counts + per-class accuracy column + overall accuracy line."""
    names = [str(n) for n in cm.class_names]
    header = ["true\\pred", *names, "accuracy"]
    rows = [header]
    accs = cm.per_class_accuracy
    for i, name in enumerate(names):
        acc = "n/a" if np.isnan(accs[i]) else f"{100.0 * accs[i]:.2f}%"
        rows.append([name, *(str(int(v)) for v in cm.counts[i]), acc])
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.append(f"overall accuracy: {100.0 * cm.overall_accuracy:.2f}%")
    return "\n".join(lines)


def write_confusion_csv(path, cm: ConfusionMatrix) -> None:
    """Header row "true_class,<predicted names>", then one count row per class."""
    names = [str(n) for n in cm.class_names]
    lines = ["true_class," + ",".join(names)]
    for name, row in zip(names, cm.counts):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def save_confusion_figure(path, cm: ConfusionMatrix) -> None:
    """Render the confusion matrix as an annotated heat map."""
    names = [str(n) for n in cm.class_names]
    counts = cm.counts
    fig, ax = plt.subplots(figsize=(1.2 * len(names) + 2.2, 1.0 * len(names) + 1.8))
    im = ax.imshow(counts, cmap="Blues")
    threshold = counts.max() / 2 if counts.max() > 0 else 0.5
    for i in range(len(names)):
        for j in range(len(names)):
            color = "white" if counts[i, j] > threshold else "black"
            ax.text(j, i, str(int(counts[i, j])), ha="center", va="center", color=color)
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    ax.set_title(f"overall accuracy {100.0 * cm.overall_accuracy:.2f}%")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_segmentation_figure(path, image: np.ndarray, seg: Segmentation) -> None:
    """Three panels: input, equalized a-channel, cleaned mask with ROI boxes."""
    fig, axes = plt.subplots(1, 3, figsize=(12, 4.2))
    axes[0].imshow(image)
    axes[0].set_title("input")
    axes[1].imshow(seg.equalized, cmap="gray", vmin=0, vmax=255)
    axes[1].set_title("equalized a-channel")
    axes[2].imshow(seg.mask, cmap="gray", interpolation="nearest")
    axes[2].set_title(f"mask ({len(seg.rois)} region{'s' if len(seg.rois) != 1 else ''})")
    for roi in seg.rois:
        rect = plt.Rectangle(
            (roi.x0 - 0.5, roi.y0 - 0.5),
            roi.x1 - roi.x0 + 1,
            roi.y1 - roi.y0 + 1,
            fill=False,
            edgecolor="red",
            linewidth=1.2,
        )
        axes[2].add_patch(rect)
    for ax in axes:
        ax.set_axis_off()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
