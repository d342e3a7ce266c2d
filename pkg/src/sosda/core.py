"""Data model: labeled feature matrices, centering, and class indicators.

Everything downstream consumes the column-centered matrix X, the one-hot
indicator Y, and the class-proportion vector D = diag((1/n) Y^T Y).
All values are immutable after construction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError


@dataclass(eq=False)
class Dataset:
    """Raw n x p feature matrix with per-row class labels.

    ``label_vocab`` fixes the class order used everywhere (indicator
    columns, centroids, model output); by default it is first-appearance
    order of the labels.
    """

    features: np.ndarray
    labels: list
    label_vocab: list

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        self.labels = list(self.labels)
        self.label_vocab = list(self.label_vocab)
        if self.features.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        n = self.features.shape[0]
        if len(self.labels) != n:
            raise DataError(f"{len(self.labels)} labels for {n} rows")
        K = len(self.label_vocab)
        if len(set(self.label_vocab)) != K:
            raise DataError("label_vocab contains duplicate entries")
        if not n >= K >= 2:
            raise DataError(f"need n >= K >= 2, got n={n}, K={K}")
        vocab = set(self.label_vocab)
        missing = [lab for lab in self.labels if lab not in vocab]
        if missing:
            raise DataError(f"label {missing[0]!r} not in label_vocab")
        counts = {v: 0 for v in self.label_vocab}
        for lab in self.labels:
            counts[lab] += 1
        for v, c in counts.items():
            if c == 0:
                raise DataError(f"class {v!r} with no observations")

    @classmethod
    def from_labels(cls, features, labels, label_vocab=None):
        """Build a Dataset; vocab defaults to first-appearance order."""
        if label_vocab is None:
            label_vocab = list(dict.fromkeys(labels))
        return cls(features, labels, label_vocab)

    @property
    def n(self):
        return self.features.shape[0]

    @property
    def p(self):
        return self.features.shape[1]

    @property
    def K(self):
        return len(self.label_vocab)

    def subset(self, idx):
        """Row subset sharing this dataset's label vocabulary."""
        idx = np.asarray(idx)
        return Dataset(self.features[idx], [self.labels[i] for i in idx],
                       self.label_vocab)


@dataclass(eq=False)
class CenteredData:
    """Column-centered matrix plus the statistics needed to re-apply it."""

    X: np.ndarray
    column_means: np.ndarray
    column_scales: np.ndarray | None = None

    def apply(self, raw):
        """Center (and scale, if fitted with scaling) new rows."""
        raw = np.asarray(raw, dtype=float)
        if raw.ndim != 2 or raw.shape[1] != self.column_means.shape[0]:
            raise DataError(
                f"expected {self.column_means.shape[0]} columns, got shape {raw.shape}")
        out = raw - self.column_means
        if self.column_scales is not None:
            out = out / self.column_scales
        return out


@dataclass(eq=False)
class ClassIndicator:
    """One-hot membership matrix Y with class counts and D = counts / n."""

    Y: np.ndarray
    counts: np.ndarray
    D: np.ndarray

    @property
    def n(self):
        return self.Y.shape[0]

    @property
    def K(self):
        return self.Y.shape[1]


def center_data(raw, scale=False):
    """Column-center a matrix; optionally divide by sample standard deviations.

    Raises DataError for a zero-variance column when ``scale`` is on.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[0] < 1 or raw.shape[1] < 1:
        raise DataError("need an n x p matrix with n, p >= 1")
    means = raw.mean(axis=0)
    X = raw - means
    scales = None
    if scale:
        if raw.shape[0] < 2:
            raise DataError("scaling needs at least 2 rows")
        scales = raw.std(axis=0, ddof=1)
        dead = np.flatnonzero(scales <= 0)
        if dead.size:
            raise DataError(f"zero-variance column {dead[0]} cannot be scaled")
        X = X / scales
    return CenteredData(X, means, scales)


def build_indicator(labels, label_vocab):
    """One-hot indicator in vocab order, plus counts and D = counts / n."""
    index = {lab: j for j, lab in enumerate(label_vocab)}
    n, K = len(labels), len(label_vocab)
    Y = np.zeros((n, K))
    for i, lab in enumerate(labels):
        if lab not in index:
            raise DataError(f"label {lab!r} not in label_vocab")
        Y[i, index[lab]] = 1.0
    counts = Y.sum(axis=0).astype(int)
    if (counts == 0).any():
        empty = label_vocab[int(np.flatnonzero(counts == 0)[0])]
        raise DataError(f"class {empty!r} with no observations")
    return ClassIndicator(Y, counts, counts / n)
