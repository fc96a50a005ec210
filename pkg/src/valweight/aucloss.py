"""Validation-set ranking objective.

The exact AUC counts correctly ordered positive/negative score pairs. The
training-time objective replaces the pair indicator with the squared loss
(1 - margin)^2 on the score margin, which collapses over all pairs into a
quadratic in theta:

    loss(theta) = 1 - 2 theta . mean_diff + theta . (second_moment @ theta)

where mean_diff and second_moment are the first and second moments of the
positive-minus-negative feature differences. Both moments are computed once
per validation set, so evaluating the objective costs O(d^2) regardless of
the number of validation instances.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .data import Dataset


@dataclass(frozen=True)
class ValidationStats:
    """Moments of positive-minus-negative validation feature differences."""

    mean_diff: np.ndarray       # (d,)   mean over all pos/neg pairs of (x+ - x-)
    second_moment: np.ndarray   # (d, d) mean over pairs of the difference outer product
    n_pos: int
    n_neg: int

    def __post_init__(self):
        mean_diff = np.asarray(self.mean_diff, dtype=np.float64)
        second_moment = np.asarray(self.second_moment, dtype=np.float64)
        d = mean_diff.shape[0]
        if second_moment.shape != (d, d):
            raise ValueError("second_moment shape does not match mean_diff length")
        if not (np.all(np.isfinite(mean_diff)) and np.all(np.isfinite(second_moment))):
            raise ValueError("validation statistics contain non-finite entries")
        if np.max(np.abs(second_moment - second_moment.T)) > 1e-12:
            raise ValueError("second_moment must be symmetric")
        if self.n_pos < 1 or self.n_neg < 1:
            raise ValueError("need at least one instance of each class")


def compute_stats(validation: Dataset) -> ValidationStats:
    """Pair-difference moments of a validation set, without the pair loop.

    The double sums over all pos/neg pairs factor into per-class sums:
    mean_diff is mean(pos) - mean(neg), and the second moment is
    mean of pos outer products + mean of neg outer products minus the two
    cross terms of the class means. Equality with the explicit pair
    enumeration is enforced by test.
    """
    pos = validation.features[validation.labels == 1]
    neg = validation.features[validation.labels == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise ValueError("validation set must contain both classes")
    mean_pos = pos.mean(axis=0)
    mean_neg = neg.mean(axis=0)
    second = (
        pos.T @ pos / len(pos)
        + neg.T @ neg / len(neg)
        - np.outer(mean_pos, mean_neg)
        - np.outer(mean_neg, mean_pos)
    )
    second = (second + second.T) / 2.0  # kill rounding asymmetry
    return ValidationStats(mean_pos - mean_neg, second, len(pos), len(neg))


def surrogate_loss(theta: np.ndarray, stats: ValidationStats) -> float:
    """Mean squared pair loss 1 - 2 theta.mu + theta.Sigma.theta."""
    theta = np.asarray(theta, dtype=np.float64)
    return float(1.0 - 2.0 * theta @ stats.mean_diff + theta @ stats.second_moment @ theta)


def surrogate_grad(theta: np.ndarray, stats: ValidationStats) -> np.ndarray:
    """Gradient of the quadratic surrogate: -2 mu + 2 Sigma theta."""
    theta = np.asarray(theta, dtype=np.float64)
    return -2.0 * stats.mean_diff + 2.0 * stats.second_moment @ theta


def exact_auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Empirical AUC with half credit for tied scores.

    Equals the fraction of (positive, negative) pairs ranked correctly,
    counting ties as 1/2, computed in O(m log m) from midranks. Matches the
    explicit pair enumeration exactly.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be 1-d vectors of equal length")
    n_pos = int(np.sum(labels == 1))
    n_neg = int(np.sum(labels == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs at least one instance of each class")
    ranks = rankdata(scores, method="average")
    pos_rank_sum = float(np.sum(ranks[labels == 1]))
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
