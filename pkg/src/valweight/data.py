"""Dataset container, CSV ingestion, standardization, splitting and synthetic corruption.

All randomized operations take an explicit integer seed and draw from
``numpy.random.default_rng`` (PCG64), so every generator in this module is
bit-reproducible for a fixed seed.
"""

import csv
from dataclasses import dataclass

import numpy as np

# Column standard deviations below this are treated as zero and the scale
# is replaced by 1.0, which leaves constant columns untouched.
STD_FLOOR = 1e-12


@dataclass(frozen=True)
class Dataset:
    """Feature matrix (n, d) paired with binary labels (n,) in {0, 1}."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise ValueError(f"features must be 2-dimensional, got ndim={features.ndim}")
        if labels.ndim != 1:
            raise ValueError(f"labels must be 1-dimensional, got ndim={labels.ndim}")
        if features.shape[0] != labels.shape[0]:
            raise ValueError(
                f"features have {features.shape[0]} rows but labels have length {labels.shape[0]}"
            )
        if not np.all(np.isfinite(features)):
            raise ValueError("features contain non-finite entries")
        if not np.all((labels == 0) | (labels == 1)):
            raise ValueError("labels must all be 0 or 1")
        features.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def n_pos(self) -> int:
        return int(np.sum(self.labels == 1))

    @property
    def n_neg(self) -> int:
        return int(np.sum(self.labels == 0))

    def take(self, indices) -> "Dataset":
        """New Dataset holding the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx])


@dataclass(frozen=True)
class StandardizerStats:
    """Per-column mean and (floored) population standard deviation."""

    mean: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        mean = np.array(self.mean, dtype=np.float64)
        scale = np.array(self.scale, dtype=np.float64)
        if mean.shape != scale.shape or mean.ndim != 1:
            raise ValueError("mean and scale must be 1-d vectors of equal length")
        if not np.all(scale > 0):
            raise ValueError("every scale entry must be strictly positive")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "scale", scale)


@dataclass(frozen=True)
class SplitSpec:
    """Fractions of the dataset per part (must sum to 1) and a shuffle seed."""

    fractions: tuple
    seed: int

    def __post_init__(self):
        fractions = tuple(float(f) for f in self.fractions)
        if len(fractions) == 0:
            raise ValueError("fractions must be nonempty")
        if any(f <= 0 or f > 1 for f in fractions):
            raise ValueError(f"every fraction must lie in (0, 1], got {fractions}")
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got sum={sum(fractions)!r}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")
        object.__setattr__(self, "fractions", fractions)


def load_csv(path) -> Dataset:
    """Read a dataset from a headed CSV file with a ``label`` column.

    Every non-label column must parse as a finite real; the label column must
    hold 0 or 1. Parse failures report the offending 1-based row and the
    column name.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row")
        header = [h.strip() for h in header]
        if "label" not in header:
            raise ValueError(f"{path}: no column named 'label' in header {header}")
        label_col = header.index("label")
        feature_cols = [j for j in range(len(header)) if j != label_col]

        rows = []
        labels = []
        for i, row in enumerate(reader):
            rownum = i + 2  # 1-based, counting the header
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}"
                )
            feats = np.empty(len(feature_cols))
            for k, j in enumerate(feature_cols):
                try:
                    value = float(row[j])
                except ValueError:
                    raise ValueError(
                        f"{path}: row {rownum}, column '{header[j]}': "
                        f"cannot parse {row[j]!r} as a real number"
                    ) from None
                if not np.isfinite(value):
                    raise ValueError(
                        f"{path}: row {rownum}, column '{header[j]}': non-finite value {row[j]!r}"
                    )
                feats[k] = value
            raw_label = row[label_col].strip()
            if raw_label not in ("0", "1"):
                raise ValueError(
                    f"{path}: row {rownum}, column 'label': expected 0 or 1, got {raw_label!r}"
                )
            rows.append(feats)
            labels.append(int(raw_label))

    if not rows:
        raise ValueError(f"{path}: no instances (header only)")
    return Dataset(np.vstack(rows), np.array(labels))


def write_csv(data: Dataset, path) -> None:
    """Write a dataset as CSV with columns f1..fd,label.

    Reals are written with 17 significant digits so that a write/load round
    trip reproduces the float64 values exactly.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        names = [f"f{j + 1}" for j in range(data.d)]
        fh.write(",".join(names + ["label"]) + "\n")
        for i in range(data.n):
            cells = ["%.17g" % v for v in data.features[i]]
            cells.append(str(int(data.labels[i])))
            fh.write(",".join(cells) + "\n")


def write_standardizer_csv(stats: StandardizerStats, path) -> None:
    """Persist standardizer parameters as CSV index,mean,scale."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("index,mean,scale\n")
        for j in range(stats.mean.shape[0]):
            fh.write(f"{j},{stats.mean[j]!r},{stats.scale[j]!r}\n")


def read_standardizer_csv(path) -> StandardizerStats:
    """Read standardizer parameters written by :func:`write_standardizer_csv`."""
    means, scales = {}, {}
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "index,mean,scale":
            raise ValueError(f"{path}: expected header 'index,mean,scale', got {header!r}")
        for line in fh:
            idx, mean, scale = line.strip().split(",")
            means[int(idx)] = float(mean)
            scales[int(idx)] = float(scale)
    if sorted(means) != list(range(len(means))):
        raise ValueError(f"{path}: column indices are not contiguous from 0")
    order = range(len(means))
    return StandardizerStats(np.array([means[j] for j in order]), np.array([scales[j] for j in order]))


def standardize_fit(data: Dataset) -> StandardizerStats:
    """Column means and population standard deviations, floored to 1.0."""
    if data.n < 1:
        raise ValueError("cannot fit a standardizer on an empty dataset")
    mean = data.features.mean(axis=0)
    std = data.features.std(axis=0)  # population (ddof=0)
    scale = np.where(std < STD_FLOOR, 1.0, std)
    return StandardizerStats(mean, scale)


def standardize_apply(data: Dataset, stats: StandardizerStats) -> Dataset:
    """Map every feature entry to (x - mean) / scale; labels untouched."""
    if data.d != stats.mean.shape[0]:
        raise ValueError(
            f"dataset has {data.d} features but standardizer was fit on {stats.mean.shape[0]}"
        )
    return Dataset((data.features - stats.mean) / stats.scale, data.labels)


def append_bias(data: Dataset) -> Dataset:
    """Append a constant 1.0 feature column (intercept for linear scores)."""
    ones = np.ones((data.n, 1))
    return Dataset(np.hstack([data.features, ones]), data.labels)


def _part_sizes(n: int, fractions) -> list:
    """Floor each fraction*n, then hand out the remainder by largest fractional part."""
    exact = [f * n for f in fractions]
    sizes = [int(np.floor(e)) for e in exact]
    remainder = n - sum(sizes)
    # ties broken by part index, so the allocation is deterministic
    order = sorted(range(len(fractions)), key=lambda j: (-(exact[j] - sizes[j]), j))
    for j in order[:remainder]:
        sizes[j] += 1
    return sizes


def split(data: Dataset, spec: SplitSpec) -> list:
    """Randomly partition the rows into one part per fraction.

    Parts are disjoint and exhaustive; sizes are floor(fraction*n) with the
    remainder distributed to the parts with the largest fractional claim.
    """
    k = len(spec.fractions)
    if data.n < k:
        raise ValueError(f"cannot split {data.n} instances into {k} parts")
    sizes = _part_sizes(data.n, spec.fractions)
    perm = np.random.default_rng(spec.seed).permutation(data.n)
    parts = []
    start = 0
    for size in sizes:
        parts.append(data.take(perm[start : start + size]))
        start += size
    return parts


def flip_labels(data: Dataset, k: int, seed: int):
    """Flip the labels of k distinct uniformly chosen rows.

    Returns the corrupted dataset and the sorted array of flipped row indices.
    """
    if k < 0 or k > data.n:
        raise ValueError(f"cannot flip {k} labels in a dataset of {data.n} instances")
    rng = np.random.default_rng(seed)
    flipped = np.sort(rng.choice(data.n, size=k, replace=False))
    labels = data.labels.copy()
    labels[flipped] = 1 - labels[flipped]
    return Dataset(data.features, labels), flipped


def subsample_by_class(data: Dataset, pos_to_neg_ratio: float, seed: int) -> Dataset:
    """Downsample one class so that #pos / #neg hits the requested ratio.

    The class that is already at or below its target count is kept whole; a
    uniform random subset of the other class is retained. Row order of the
    survivors is preserved.
    """
    if pos_to_neg_ratio <= 0:
        raise ValueError("pos_to_neg_ratio must be positive")
    n_pos, n_neg = data.n_pos, data.n_neg
    if n_pos == 0 or n_neg == 0:
        raise ValueError("both classes must be present to rebalance")

    rng = np.random.default_rng(seed)
    pos_idx = np.flatnonzero(data.labels == 1)
    neg_idx = np.flatnonzero(data.labels == 0)
    if int(round(pos_to_neg_ratio * n_neg)) == n_pos:
        return data  # already at the requested ratio (within rounding)
    if n_pos > pos_to_neg_ratio * n_neg:
        target_pos = int(round(pos_to_neg_ratio * n_neg))
        if target_pos < 1:
            raise ValueError(
                f"ratio {pos_to_neg_ratio} unattainable: would keep no positive instances"
            )
        pos_idx = np.sort(rng.choice(pos_idx, size=target_pos, replace=False))
    else:
        target_neg = int(round(n_pos / pos_to_neg_ratio))
        if target_neg < 1:
            raise ValueError(
                f"ratio {pos_to_neg_ratio} unattainable: would keep no negative instances"
            )
        neg_idx = np.sort(rng.choice(neg_idx, size=target_neg, replace=False))
    return data.take(np.sort(np.concatenate([pos_idx, neg_idx])))


def make_gaussian_blobs(
    n: int, d: int, separation: float, pos_fraction: float, seed: int
) -> Dataset:
    """Two isotropic unit-variance Gaussian classes offset along the first axis.

    Positives are centered at +separation/2 on axis 0, negatives at
    -separation/2; class counts are round(n * pos_fraction) and the remainder.
    Rows are shuffled.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    if d < 1:
        raise ValueError("need d >= 1")
    if separation < 0:
        raise ValueError("separation must be nonnegative")
    if not 0 < pos_fraction < 1:
        raise ValueError("pos_fraction must lie strictly between 0 and 1")
    n_pos = int(np.round(n * pos_fraction))
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, d))
    labels = np.zeros(n, dtype=np.int64)
    labels[:n_pos] = 1
    features[:n_pos, 0] += separation / 2.0
    features[n_pos:, 0] -= separation / 2.0
    perm = rng.permutation(n)
    return Dataset(features[perm], labels[perm])
