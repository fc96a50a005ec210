"""Bi-level trainer: learn per-instance weights against a validation ranking loss.

The inner problem is weighted logistic training; the outer problem moves the
instance weights to reduce the quadratic pair-ranking loss on a clean
validation set. The weight gradient comes from differentiating the inner
stationarity condition g(w, theta) = 0: the parameter Jacobian is
-(dg/dtheta)^-1 (dg/dw), so the outer gradient is obtained adjoint-style with
one symmetric linear solve in d dimensions (conjugate gradients on
Hessian-vector products, the Hessian is never materialized) followed by one
pass over the per-instance gradients.

Rather than solving the inner problem to optimality before every weight
update, the trainer alternates: one gradient step on theta with the current
weights, then one projected gradient step on the weights at the new theta.
"""

from dataclasses import dataclass, replace

import numpy as np

from .aucloss import ValidationStats, compute_stats, exact_auc, surrogate_grad, surrogate_loss
from .data import Dataset
from .model import (
    per_instance_grad_matrix,
    score,
    training_grad,
    weighted_hvp,
    weighted_training_loss,
)


@dataclass(frozen=True)
class HyperParams:
    """Training knobs. Defaults: step sizes 0.1 / 0.4, 100 epochs, weights start at 0.5."""

    lambda_theta: float = 0.1     # step size for theta
    lambda_w: float = 0.4         # step size for the instance weights
    epochs: int = 100
    w_init: float = 0.5
    damping: float = 1e-6         # added to the Hessian diagonal before the solve
    cg_tol: float = 1e-10
    cg_max_iter: int = 200
    batch_size: int | None = None  # None = full batch
    seed: int = 0

    def __post_init__(self):
        if self.lambda_theta < 0 or self.lambda_w < 0:
            raise ValueError("step sizes must be nonnegative")
        if self.epochs < 1:
            raise ValueError("epochs must be a positive count")
        if not 0.0 <= self.w_init <= 1.0:
            raise ValueError("w_init must lie in [0, 1]")
        if self.damping < 0:
            raise ValueError("damping must be nonnegative")
        if self.cg_tol <= 0:
            raise ValueError("cg_tol must be positive")
        if self.cg_max_iter < 1:
            raise ValueError("cg_max_iter must be a positive count")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be a positive count when set")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_surrogate: float
    val_auc: float


@dataclass(frozen=True)
class TrainReport:
    """Per-epoch learning curves plus the final parameters and weights."""

    epochs: tuple
    final_theta: np.ndarray
    final_weights: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "epochs", tuple(self.epochs))
        weights = np.asarray(self.final_weights, dtype=np.float64)
        if np.any(weights < 0) or np.any(weights > 1):
            raise ValueError("final weights must lie in [0, 1]")


@dataclass(frozen=True)
class CGResult:
    x: np.ndarray
    converged: bool
    residual_norm: float
    iterations: int


def cg_solve(apply_a, b: np.ndarray, tol: float, max_iter: int) -> CGResult:
    """Conjugate gradients for A x = b given only the product v -> A v.

    A must be symmetric positive definite. Stops when the residual norm falls
    to tol * max(1, ||b||); past max_iter the current iterate is returned with
    converged=False. Non-finite intermediates (an indefinite operator or bad
    damping) raise FloatingPointError.
    """
    b = np.asarray(b, dtype=np.float64)
    x = np.zeros_like(b)
    r = b.copy()
    target = tol * max(1.0, float(np.linalg.norm(b)))
    rs = float(r @ r)
    if np.sqrt(rs) <= target:
        return CGResult(x, True, float(np.sqrt(rs)), 0)
    p = r.copy()
    for k in range(1, max_iter + 1):
        ap = apply_a(p)
        if not np.all(np.isfinite(ap)):
            raise FloatingPointError("non-finite operator output in conjugate gradients")
        curvature = float(p @ ap)
        if curvature <= 0.0:
            raise FloatingPointError(
                f"non-positive curvature {curvature!r} in conjugate gradients; "
                "operator is not positive definite (increase damping)"
            )
        alpha = rs / curvature
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(r @ r)
        if not np.isfinite(rs_new):
            raise FloatingPointError("non-finite residual in conjugate gradients")
        if np.sqrt(rs_new) <= target:
            return CGResult(x, True, float(np.sqrt(rs_new)), k)
        p = r + (rs_new / rs) * p
        rs = rs_new
    return CGResult(x, False, float(np.sqrt(rs)), max_iter)


def implicit_grad_w(
    theta: np.ndarray,
    weights: np.ndarray,
    train_set: Dataset,
    stats: ValidationStats,
    hp: HyperParams,
) -> np.ndarray:
    """Gradient of the validation surrogate with respect to the instance weights.

    Solves (H + damping*I) v = grad_theta(surrogate) with H the weighted
    training Hessian, then contracts v against the per-instance gradient
    columns: the result is -G^T v, one entry per training instance. This is
    the adjoint ordering of the implicit-function-theorem Jacobian: a single
    d-dimensional solve instead of one solve per instance.
    """
    b = surrogate_grad(theta, stats)

    def apply_a(v):
        hv = weighted_hvp(theta, weights, train_set, v)
        return hv + hp.damping * v if hp.damping > 0 else hv

    result = cg_solve(apply_a, b, hp.cg_tol, hp.cg_max_iter)
    if not result.converged:
        raise RuntimeError(
            f"conjugate gradients did not reach tolerance {hp.cg_tol} within "
            f"{hp.cg_max_iter} iterations (residual {result.residual_norm:.3e})"
        )
    grad_matrix = per_instance_grad_matrix(theta, train_set)
    return -(grad_matrix.T @ result.x)


def project_weights(weights: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the box [0, 1]^n (componentwise clamp)."""
    weights = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(weights)):
        raise ValueError("weights contain non-finite entries")
    return np.clip(weights, 0.0, 1.0)


def alternating_step(
    theta: np.ndarray,
    weights: np.ndarray,
    train_set: Dataset,
    stats: ValidationStats,
    hp: HyperParams,
):
    """One alternating update: theta steps with the old weights, then the
    weights step against the implicit gradient at the new theta, projected
    back onto [0, 1]."""
    theta_new = theta - hp.lambda_theta * training_grad(theta, weights, train_set)
    if hp.lambda_w == 0.0:
        return theta_new, np.asarray(weights, dtype=np.float64).copy()
    grad_w = implicit_grad_w(theta_new, weights, train_set, stats, hp)
    weights_new = project_weights(weights - hp.lambda_w * grad_w)
    return theta_new, weights_new


def _epoch_metrics(epoch, theta, weights, train_set, validation, stats):
    record = EpochRecord(
        epoch=epoch,
        train_loss=weighted_training_loss(theta, weights, train_set),
        val_surrogate=surrogate_loss(theta, stats),
        val_auc=exact_auc(score(theta, validation.features), validation.labels),
    )
    values = (record.train_loss, record.val_surrogate, record.val_auc)
    if not all(np.isfinite(v) for v in values):
        raise FloatingPointError(
            f"non-finite metric at epoch {epoch}: train_loss={record.train_loss!r}, "
            f"val_surrogate={record.val_surrogate!r}, val_auc={record.val_auc!r}"
        )
    return record


def train(train_set: Dataset, validation: Dataset, hp: HyperParams) -> TrainReport:
    """Run the alternating scheme for hp.epochs epochs and report curves.

    theta starts at zero, every instance weight at hp.w_init. With
    hp.batch_size set, each epoch draws one seeded random minibatch: the
    theta step uses only the batch, and only the batch members' weights are
    updated (each with its exact partial under the batch view); all other
    weights are left untouched.
    """
    if train_set.d != validation.d:
        raise ValueError(
            f"training set has {train_set.d} features but validation has {validation.d}"
        )
    stats = compute_stats(validation)
    theta = np.zeros(train_set.d)
    weights = np.full(train_set.n, float(hp.w_init))
    rng = np.random.default_rng(hp.seed) if hp.batch_size is not None else None

    records = []
    for epoch in range(1, hp.epochs + 1):
        if rng is None:
            theta, weights = alternating_step(theta, weights, train_set, stats, hp)
        else:
            size = min(hp.batch_size, train_set.n)
            batch = rng.choice(train_set.n, size=size, replace=False)
            sub = train_set.take(batch)
            theta_b, weights_b = alternating_step(theta, weights[batch], sub, stats, hp)
            theta = theta_b
            weights = weights.copy()
            weights[batch] = weights_b
        records.append(_epoch_metrics(epoch, theta, weights, train_set, validation, stats))
    return TrainReport(tuple(records), theta, weights)


def train_baseline_erm(train_set: Dataset, hp: HyperParams) -> np.ndarray:
    """Plain unweighted training: hp.epochs gradient steps with all weights 1."""
    theta = np.zeros(train_set.d)
    ones = np.ones(train_set.n)
    for epoch in range(1, hp.epochs + 1):
        theta = theta - hp.lambda_theta * training_grad(theta, ones, train_set)
        loss = weighted_training_loss(theta, ones, train_set)
        if not np.isfinite(loss):
            raise FloatingPointError(f"non-finite training loss at epoch {epoch}")
    return theta


def erm_hyperparams(hp: HyperParams) -> HyperParams:
    """The hyperparameters under which `train` reproduces the unweighted baseline."""
    return replace(hp, lambda_w=0.0, w_init=1.0)


def write_curves_csv(report: TrainReport, path) -> None:
    """Per-epoch curves as CSV epoch,train_loss,val_surrogate,val_auc."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,train_loss,val_surrogate,val_auc\n")
        for rec in report.epochs:
            fh.write(f"{rec.epoch},{rec.train_loss!r},{rec.val_surrogate!r},{rec.val_auc!r}\n")


def write_weights_csv(weights: np.ndarray, path) -> None:
    """Instance weights as CSV index,weight."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,weight\n")
        for i, w in enumerate(np.asarray(weights, dtype=np.float64)):
            fh.write(f"{i},{w!r}\n")


def read_weights_csv(path) -> np.ndarray:
    """Read weights written by :func:`write_weights_csv`, ordered by index."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index,weight":
            raise ValueError(f"{path}: expected header 'index,weight', got {header!r}")
        for line in fh:
            idx, _, value = line.strip().partition(",")
            values[int(idx)] = float(value)
    if sorted(values) != list(range(len(values))):
        raise ValueError(f"{path}: weight indices are not contiguous from 0")
    return np.array([values[i] for i in range(len(values))])
