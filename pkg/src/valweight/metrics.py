"""Thresholded classification metrics and class-prior probability correction."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassificationCounts:
    true_positive: int
    false_positive: int
    true_negative: int
    false_negative: int

    @property
    def total(self) -> int:
        return self.true_positive + self.false_positive + self.true_negative + self.false_negative


def threshold_scores(scores: np.ndarray, tau: float) -> np.ndarray:
    """Label 1 exactly where score > tau (strict, so ties at tau go to 0)."""
    return (np.asarray(scores, dtype=np.float64) > tau).astype(np.int64)


def confusion_counts(predicted: np.ndarray, truth: np.ndarray) -> ClassificationCounts:
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(
            f"predicted has shape {predicted.shape} but truth has shape {truth.shape}"
        )
    pred_pos = predicted == 1
    true_pos = truth == 1
    return ClassificationCounts(
        true_positive=int(np.sum(pred_pos & true_pos)),
        false_positive=int(np.sum(pred_pos & ~true_pos)),
        true_negative=int(np.sum(~pred_pos & ~true_pos)),
        false_negative=int(np.sum(~pred_pos & true_pos)),
    )


def precision_recall_f1(predicted: np.ndarray, truth: np.ndarray):
    """Precision TP/(TP+FP), recall TP/(TP+FN), and their harmonic mean.

    Precision is 0 when nothing is predicted positive, and F1 is 0 when
    precision + recall is 0. The truth must contain at least one positive.
    """
    counts = confusion_counts(predicted, truth)
    if counts.true_positive + counts.false_negative == 0:
        raise ValueError("truth contains no positive instances")
    tp = counts.true_positive
    predicted_pos = tp + counts.false_positive
    precision = tp / predicted_pos if predicted_pos > 0 else 0.0
    recall = tp / (tp + counts.false_negative)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return precision, recall, f1


def accuracy(predicted: np.ndarray, truth: np.ndarray) -> float:
    """Fraction of instances with predicted label equal to the truth."""
    predicted = np.asarray(predicted)
    truth = np.asarray(truth)
    if predicted.shape != truth.shape:
        raise ValueError(
            f"predicted has shape {predicted.shape} but truth has shape {truth.shape}"
        )
    return float(np.mean(predicted == truth))


def calibrate_probability(p_s, beta: float):
    """Correct a predicted probability for a known class sampling ratio beta.

    p = p_s * beta / (p_s * beta - p_s + 1). Identity at beta = 1, maps
    [0, 1] onto [0, 1] and is strictly increasing in p_s. Accepts scalars or
    arrays.
    """
    p_s = np.asarray(p_s, dtype=np.float64)
    if np.any(p_s < 0) or np.any(p_s > 1):
        raise ValueError("p_s must lie in [0, 1]")
    if not 0 < beta <= 1:
        raise ValueError("beta must lie in (0, 1]")
    corrected = p_s * beta / (p_s * beta - p_s + 1.0)
    return float(corrected) if corrected.ndim == 0 else corrected
