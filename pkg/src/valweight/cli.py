"""Command-line experiment harness.

Subcommands:
  synth          generate a synthetic corrupted train/validation/test triple
  train          fit the reweighting trainer (or the unweighted baseline)
  eval           score a labeled CSV with a saved model and report metrics
  weights-audit  summarize learned weights against the known corrupted rows

Commands print machine-readable ``name=value`` lines, write CSV reports, and
render the report figures next to them. Reruns with identical inputs and
seeds overwrite all outputs with identical content.
"""

import argparse
import os
import sys

import numpy as np
from scipy.special import expit

from . import bilevel, data, metrics, model, plots
from .aucloss import exact_auc


def _fmt(value) -> str:
    return repr(float(value))


def _parse_split(raw: str, n: int):
    """A comma list is fractions if it sums to 1, else integer counts summing to n."""
    try:
        values = [float(tok) for tok in raw.split(",")]
    except ValueError:
        raise ValueError(f"cannot parse split {raw!r} as a comma-separated number list") from None
    total = sum(values)
    if abs(total - 1.0) <= 1e-6:
        return tuple(values)
    if all(v == int(v) for v in values) and int(total) == n:
        return tuple(v / n for v in values)
    raise ValueError(
        f"split {raw!r} must be fractions summing to 1 or integer counts summing to n={n}"
    )


def _read_flipped_csv(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index":
            raise ValueError(f"{path}: expected header 'index', got {header!r}")
        indices = [int(line.strip()) for line in fh if line.strip()]
    return np.array(sorted(indices), dtype=np.int64)


def _write_flipped_csv(indices, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index\n")
        for idx in indices:
            fh.write(f"{int(idx)}\n")


def cmd_synth(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    fractions = _parse_split(args.split, args.n)
    if len(fractions) != 3:
        raise ValueError("--split must describe exactly 3 parts: train,validation,test")
    blobs = data.make_gaussian_blobs(args.n, args.d, args.sep, args.pos_fraction, args.seed)
    parts = data.split(blobs, data.SplitSpec(fractions, args.seed + 1))
    train_part, val_part, test_part = parts
    train_part, flipped = data.flip_labels(train_part, args.flips, args.seed + 2)
    if args.val_ratio is not None:
        val_part = data.subsample_by_class(val_part, args.val_ratio, args.seed + 3)

    data.write_csv(train_part, os.path.join(args.out, "train.csv"))
    data.write_csv(val_part, os.path.join(args.out, "validation.csv"))
    data.write_csv(test_part, os.path.join(args.out, "test.csv"))
    _write_flipped_csv(flipped, os.path.join(args.out, "flipped.csv"))
    print(f"wrote train/validation/test of sizes {train_part.n}/{val_part.n}/{test_part.n} "
          f"with {len(flipped)} flipped labels to {args.out}")
    return 0


def cmd_train(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    train_set = data.load_csv(args.train)
    validation = data.load_csv(args.validation)

    scaler = data.standardize_fit(train_set)
    train_set = data.append_bias(data.standardize_apply(train_set, scaler))
    validation = data.append_bias(data.standardize_apply(validation, scaler))

    hp = bilevel.HyperParams(
        lambda_theta=args.lambda_theta,
        lambda_w=args.lambda_w,
        epochs=args.epochs,
        w_init=args.w_init,
        damping=args.damping,
        cg_tol=args.cg_tol,
        cg_max_iter=args.cg_max_iter,
        batch_size=args.batch_size,
        seed=args.seed,
    )
    if args.baseline == "erm":
        hp = bilevel.erm_hyperparams(hp)
    report = bilevel.train(train_set, validation, hp)

    bilevel.write_curves_csv(report, os.path.join(args.out, "curves.csv"))
    bilevel.write_weights_csv(report.final_weights, os.path.join(args.out, "weights.csv"))
    model.save_theta(report.final_theta, os.path.join(args.out, "theta.csv"))
    data.write_standardizer_csv(scaler, os.path.join(args.out, "scaler.csv"))
    if not args.no_plots:
        plots.save_curves_figure(report, os.path.join(args.out, "curves.png"))
        plots.save_weights_figure(report.final_weights, os.path.join(args.out, "weights.png"))
    print(f"final_val_auc={_fmt(report.epochs[-1].val_auc)}")
    return 0


def cmd_eval(args) -> int:
    theta = model.load_theta(args.theta)
    dataset = data.load_csv(args.data)
    if args.scaler is not None:
        dataset = data.standardize_apply(dataset, data.read_standardizer_csv(args.scaler))
    dataset = data.append_bias(dataset)
    if theta.shape[0] != dataset.d:
        raise ValueError(
            f"model has {theta.shape[0]} coefficients but data (with bias) has {dataset.d} columns"
        )
    scores = model.score(theta, dataset.features)
    auc = exact_auc(scores, dataset.labels)
    if args.calibrate is not None:
        probs = metrics.calibrate_probability(expit(scores), args.calibrate)
        predicted = metrics.threshold_scores(probs, 0.5)
    else:
        predicted = metrics.threshold_scores(scores, args.threshold)
    precision, recall, f1 = metrics.precision_recall_f1(predicted, dataset.labels)
    acc = metrics.accuracy(predicted, dataset.labels)

    lines = [
        ("auc", auc),
        ("precision", precision),
        ("recall", recall),
        ("f1", f1),
        ("accuracy", acc),
    ]
    for name, value in lines:
        print(f"{name}={_fmt(value)}")
    if args.out is not None:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("metric,value\n")
            for name, value in lines:
                fh.write(f"{name},{_fmt(value)}\n")
    return 0


def _group_stats(values: np.ndarray):
    if len(values) == 0:
        return float("nan"), float("nan")
    return float(np.mean(values)), float(np.median(values))


def cmd_weights_audit(args) -> int:
    weights = bilevel.read_weights_csv(args.weights)
    flipped = _read_flipped_csv(args.flipped)
    if len(flipped) > 0 and (flipped.min() < 0 or flipped.max() >= len(weights)):
        raise ValueError(
            f"flipped index out of range: weights file holds {len(weights)} entries"
        )
    mask = np.zeros(len(weights), dtype=bool)
    mask[flipped] = True
    flipped_w = weights[mask]
    clean_w = weights[~mask]

    flipped_mean, flipped_median = _group_stats(flipped_w)
    clean_mean, clean_median = _group_stats(clean_w)
    flipped_below = float(np.mean(flipped_w < 0.1)) if len(flipped_w) else float("nan")
    clean_above = float(np.mean(clean_w > 0.9)) if len(clean_w) else float("nan")

    print(f"flipped_mean={_fmt(flipped_mean)}")
    print(f"flipped_median={_fmt(flipped_median)}")
    print(f"clean_mean={_fmt(clean_mean)}")
    print(f"clean_median={_fmt(clean_median)}")
    print(f"flipped_below_0.1={_fmt(flipped_below)}")
    print(f"clean_above_0.9={_fmt(clean_above)}")
    if args.plot is not None:
        plots.save_weights_figure(weights, args.plot, flipped)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="valweight",
        description="Instance reweighting against a clean-validation ranking objective.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic corrupted data files")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--n", type=int, required=True, help="total number of instances")
    p.add_argument("--d", type=int, default=2, help="feature dimension (default 2)")
    p.add_argument("--split", default="0.8,0.1,0.1",
                   help="train,validation,test as fractions summing to 1 or counts summing to n")
    p.add_argument("--flips", type=int, default=0, help="labels to flip in the training part")
    p.add_argument("--sep", type=float, default=6.0, help="class-center separation")
    p.add_argument("--pos-fraction", type=float, default=0.5, help="positive class fraction")
    p.add_argument("--val-ratio", type=float, default=None,
                   help="rebalance the validation part to this pos:neg ratio")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train the reweighting model (or the ERM baseline)")
    p.add_argument("--train", required=True, help="training CSV")
    p.add_argument("--validation", required=True, help="validation CSV")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--lambda-theta", type=float, default=0.1, help="step size for theta")
    p.add_argument("--lambda-w", type=float, default=0.4, help="step size for the weights")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--w-init", type=float, default=0.5, help="initial instance weight")
    p.add_argument("--damping", type=float, default=1e-6, help="Hessian diagonal damping")
    p.add_argument("--cg-tol", type=float, default=1e-10)
    p.add_argument("--cg-max-iter", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=None, help="minibatch size (default full batch)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--baseline", choices=["erm"], default=None,
                   help="train the unweighted baseline instead")
    p.add_argument("--no-plots", action="store_true", help="skip figure rendering")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a saved model on a labeled CSV")
    p.add_argument("--theta", required=True, help="model coefficients CSV")
    p.add_argument("--data", required=True, help="labeled CSV to score")
    p.add_argument("--scaler", default=None,
                   help="standardizer CSV saved by train (apply before scoring)")
    p.add_argument("--threshold", type=float, default=0.0,
                   help="decision threshold on the linear score (default 0)")
    p.add_argument("--calibrate", type=float, default=None,
                   help="sampling ratio beta; correct probabilities and threshold at 0.5")
    p.add_argument("--out", default=None, help="also write the metrics to this CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("weights-audit", help="summarize weights of flipped vs clean instances")
    p.add_argument("--weights", required=True, help="weights CSV from train")
    p.add_argument("--flipped", required=True, help="flipped-index CSV from synth")
    p.add_argument("--plot", default=None, help="render the grouped weight histogram here")
    p.set_defaults(func=cmd_weights_audit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, FloatingPointError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
