"""Weighted logistic model: scores, probabilities, losses, gradients, Hessian products.

The model is linear, ``score = theta . x``, with the intercept carried as an
appended constant feature (see :func:`valweight.data.append_bias`). All
per-instance sums carry an explicit 1/n factor, so the gradient of the
weighted training loss, the per-instance gradient matrix and the weighted
Hessian are mutually consistent.
"""

import numpy as np
from scipy.special import expit

from .data import Dataset


def score(theta: np.ndarray, x: np.ndarray) -> float:
    """Linear score theta . x (row-wise if x is a matrix)."""
    return x @ theta


def predict_prob(theta: np.ndarray, x: np.ndarray):
    """Probability of the positive class, sigmoid(theta . x), overflow-safe."""
    return expit(score(theta, x))


def instance_loss(theta: np.ndarray, x: np.ndarray, y):
    """Negative log-likelihood -y*t + log(1 + e^t) with t = theta . x.

    Evaluated as max(t, 0) - y*t + log1p(e^-|t|), which is exact for large
    |t| and never negative.
    """
    t = score(theta, x)
    return np.maximum(t, 0.0) - np.asarray(y) * t + np.log1p(np.exp(-np.abs(t)))


def _check_weights(weights: np.ndarray, data: Dataset) -> np.ndarray:
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (data.n,):
        raise ValueError(f"weights have shape {weights.shape}, expected ({data.n},)")
    return weights


def weighted_training_loss(theta: np.ndarray, weights: np.ndarray, train: Dataset) -> float:
    """(1/n) sum_i w_i * loss_i(theta)."""
    weights = _check_weights(weights, train)
    losses = instance_loss(theta, train.features, train.labels)
    return float(np.dot(weights, losses) / train.n)


def training_grad(theta: np.ndarray, weights: np.ndarray, train: Dataset) -> np.ndarray:
    """Gradient of the weighted training loss: (1/n) sum_i w_i x_i (p_i - y_i)."""
    weights = _check_weights(weights, train)
    residual = predict_prob(theta, train.features) - train.labels
    return train.features.T @ (weights * residual) / train.n


def per_instance_grad_matrix(theta: np.ndarray, train: Dataset) -> np.ndarray:
    """d x n matrix G whose column i is (1/n) x_i (p_i - y_i).

    G @ w equals training_grad(theta, w, train) for every weight vector, i.e.
    G is the derivative of the weighted gradient with respect to the weights.
    """
    residual = predict_prob(theta, train.features) - train.labels
    return (train.features * residual[:, None]).T / train.n


def weighted_hvp(theta: np.ndarray, weights: np.ndarray, train: Dataset, v: np.ndarray) -> np.ndarray:
    """Product H @ v with H = (1/n) sum_i w_i p_i (1 - p_i) x_i x_i^T.

    H is never materialized; the product costs two matrix-vector passes over
    the data. H is PSD whenever all weights are nonnegative.
    """
    weights = _check_weights(weights, train)
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (train.d,):
        raise ValueError(f"v has shape {v.shape}, expected ({train.d},)")
    p = predict_prob(theta, train.features)
    coef = weights * p * (1.0 - p)
    return train.features.T @ (coef * (train.features @ v)) / train.n


def save_theta(theta: np.ndarray, path) -> None:
    """Write model coefficients as CSV rows index,value."""
    theta = np.asarray(theta, dtype=np.float64)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,value\n")
        for j, value in enumerate(theta):
            fh.write(f"{j},{value!r}\n")


def load_theta(path) -> np.ndarray:
    """Read model coefficients written by :func:`save_theta`."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index,value":
            raise ValueError(f"{path}: expected header 'index,value', got {header!r}")
        for line in fh:
            idx, _, value = line.strip().partition(",")
            values[int(idx)] = float(value)
    if sorted(values) != list(range(len(values))):
        raise ValueError(f"{path}: coefficient indices are not contiguous from 0")
    return np.array([values[j] for j in range(len(values))])
