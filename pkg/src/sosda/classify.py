"""Projection onto fitted discriminant directions and nearest-centroid rules."""

from dataclasses import dataclass

import numpy as np

from .errors import DataError

NONZERO_TOL = 1e-12


@dataclass(eq=False)
class ProjectedData:
    Z: np.ndarray
    labels: list | None = None


def project(model, raw):
    """Center new rows with the model's stored statistics and apply B."""
    raw = np.asarray(raw, dtype=float)
    if raw.ndim != 2 or raw.shape[1] != model.p:
        raise DataError(f"expected {model.p} feature columns, got shape {raw.shape}")
    Xc = raw - model.column_means
    if model.column_scales is not None:
        Xc = Xc / model.column_scales
    return ProjectedData(Xc @ model.B)


def fit_centroids(projected, label_vocab):
    """Per-class means of projected rows, one row per vocab entry."""
    if projected.labels is None:
        raise DataError("projected data carries no labels")
    Z = projected.Z
    rows = []
    for lab in label_vocab:
        idx = [i for i, l in enumerate(projected.labels) if l == lab]
        if not idx:
            raise DataError(f"class {lab!r} with no observations")
        rows.append(Z[idx].mean(axis=0))
    return np.vstack(rows)


def predict(model, raw):
    """Nearest-centroid labels plus the m x K distance matrix.

    Ties go to the class earliest in the label vocabulary.
    """
    Z = project(model, raw).Z
    diff = Z[:, None, :] - model.centroids[None, :, :]
    scores = np.sqrt(np.sum(diff * diff, axis=2))
    picks = np.argmin(scores, axis=1)
    labels = [model.label_vocab[j] for j in picks]
    return labels, scores


def evaluate(predictions, truth, B, time_seconds=0.0):
    """Error and sparsity metrics: {numErr, fracErr, feats, fracFeats, time}.

    A feature counts as used when its row of B has any entry of magnitude
    above 1e-12.
    """
    if len(predictions) != len(truth):
        raise DataError(f"{len(predictions)} predictions for {len(truth)} truths")
    num_err = sum(1 for a, b in zip(predictions, truth) if a != b)
    m = len(truth)
    B = np.asarray(B, dtype=float)
    feats = int(np.sum(np.any(np.abs(B) > NONZERO_TOL, axis=1)))
    return {
        "numErr": num_err,
        "fracErr": num_err / m if m else 0.0,
        "feats": feats,
        "fracFeats": feats / B.shape[0] if B.shape[0] else 0.0,
        "time": time_seconds,
    }
