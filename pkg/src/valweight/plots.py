"""Figure rendering for training reports.

Renders the learning curves and the instance-weight distribution next to the
CSV reports, using the non-interactive Agg backend so the CLI works headless.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bilevel import TrainReport

DPI = 150


def save_curves_figure(report: TrainReport, path) -> None:
    """Training loss, validation surrogate and validation AUC against epoch."""
    epochs = [rec.epoch for rec in report.epochs]
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    axes[0].plot(epochs, [rec.train_loss for rec in report.epochs], color="tab:blue")
    axes[0].set_ylabel("weighted training loss")
    axes[1].plot(epochs, [rec.val_surrogate for rec in report.epochs], color="tab:orange")
    axes[1].set_ylabel("validation surrogate loss")
    axes[2].plot(epochs, [rec.val_auc for rec in report.epochs], color="tab:green")
    axes[2].set_ylabel("validation AUC")
    axes[2].set_ylim(0.0, 1.05)
    for ax in axes:
        ax.set_xlabel("epoch")
        ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def save_weights_figure(weights: np.ndarray, path, flipped_indices=None) -> None:
    """Histogram of instance weights, split by corrupted/clean when known."""
    weights = np.asarray(weights, dtype=np.float64)
    bins = np.linspace(0.0, 1.0, 41)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    if flipped_indices is not None and len(flipped_indices) > 0:
        mask = np.zeros(len(weights), dtype=bool)
        mask[np.asarray(flipped_indices, dtype=np.int64)] = True
        ax.hist(weights[~mask], bins=bins, alpha=0.7, label="clean", color="tab:blue")
        ax.hist(weights[mask], bins=bins, alpha=0.7, label="flipped", color="tab:red")
        ax.legend()
    else:
        ax.hist(weights, bins=bins, color="tab:blue")
    ax.set_xlabel("instance weight")
    ax.set_ylabel("count")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
