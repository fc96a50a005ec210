"""Validation-guided instance reweighting for noisy, class-biased binary labels.

Learns one weight in [0, 1] per training instance alongside a linear logistic
model, moving the weights to minimize a pairwise ranking loss on a small
clean validation set. Harmful (mislabeled) instances receive weights near 0,
clean ones near 1. Because the validation objective is an AUC surrogate, the
learned model is insensitive to a mismatch between training and deployment
class priors.
"""

from .aucloss import ValidationStats, compute_stats, exact_auc, surrogate_grad, surrogate_loss
from .bilevel import (
    CGResult,
    EpochRecord,
    HyperParams,
    TrainReport,
    alternating_step,
    cg_solve,
    implicit_grad_w,
    project_weights,
    train,
    train_baseline_erm,
)
from .data import (
    Dataset,
    SplitSpec,
    StandardizerStats,
    append_bias,
    flip_labels,
    load_csv,
    make_gaussian_blobs,
    split,
    standardize_apply,
    standardize_fit,
    subsample_by_class,
    write_csv,
)
from .metrics import (
    ClassificationCounts,
    accuracy,
    calibrate_probability,
    confusion_counts,
    precision_recall_f1,
    threshold_scores,
)
from .model import (
    instance_loss,
    per_instance_grad_matrix,
    predict_prob,
    score,
    training_grad,
    weighted_hvp,
    weighted_training_loss,
)

__version__ = "0.1.0"
