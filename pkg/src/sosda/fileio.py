"""CSV and JSON file formats: datasets, predictions, models, CV results.

Dataset CSVs are UTF-8 with a header row, one optional label column, and
numeric feature columns (decimal point, comma separator).  Models persist
as versioned JSON with row-major matrices; reloading reproduces predictions
bit for bit because floats round-trip through repr.
"""

import csv
import json

import numpy as np

from .errors import DataError
from .sos import SosFitConfig, SosModel

MODEL_FORMAT_VERSION = 1


def read_table(path, label_col=None):
    """Parse a dataset CSV into (features, labels, feature_names).

    ``labels`` is None when ``label_col`` is None; parse failures name the
    offending row and column.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if label_col is not None and label_col not in header:
            raise DataError(f"{path}: no column named {label_col!r}")
        label_idx = header.index(label_col) if label_col is not None else None
        feature_names = [h for j, h in enumerate(header) if j != label_idx]
        rows, labels = [], []
        for i, rec in enumerate(reader, start=2):
            if len(rec) != len(header):
                raise DataError(f"{path}: row {i} has {len(rec)} fields, "
                                f"expected {len(header)}")
            vals = []
            for j, cell in enumerate(rec):
                if j == label_idx:
                    labels.append(cell.strip())
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DataError(f"{path}: row {i}, column {header[j]!r}: "
                                    f"not numeric: {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise DataError(f"{path}: no data rows")
    X = np.asarray(rows, dtype=float)
    return X, (labels if label_col is not None else None), feature_names


def write_dataset_csv(path, dataset, label_col="class"):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([label_col] + [f"f{j + 1}" for j in range(dataset.p)])
        for i in range(dataset.n):
            w.writerow([dataset.labels[i]]
                       + [repr(float(v)) for v in dataset.features[i]])


def write_predictions_csv(path, labels, scores, vocab):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row_index", "predicted_label"] + [f"dist_{v}" for v in vocab])
        for i, lab in enumerate(labels):
            w.writerow([i, lab] + [repr(float(v)) for v in scores[i]])


def _config_echo(config, omega_desc):
    return {
        "lambda": config.lam,
        "gamma": config.gamma,
        "q": config.q,
        "solver": config.solver,
        "omega": omega_desc,
        "inner_tol": config.inner.tol,
        "inner_max": config.inner.max_iter,
        "outer_tol": config.outer_tol,
        "outer_max": config.max_outer,
        "mu": config.inner.mu,
        "theta_init": config.theta_init,
        "seed": config.seed,
        "scale": config.scale,
    }


def save_model(path, model, omega_desc="identity"):
    doc = {
        "version": MODEL_FORMAT_VERSION,
        "p": model.p,
        "K": model.K,
        "q": model.q,
        "label_vocab": [str(v) for v in model.label_vocab],
        "column_means": model.column_means.tolist(),
        "column_scales": None if model.column_scales is None
        else model.column_scales.tolist(),
        "B": model.B.tolist(),
        "Theta": model.Theta.tolist(),
        "centroids": model.centroids.tolist(),
        "config": _config_echo(model.config, omega_desc),
        "diagnostics": {
            "fit_seconds": model.diagnostics.get("fit_seconds"),
            "outer_iterations": model.diagnostics.get("outer_iterations"),
            "final_objectives": model.diagnostics.get("final_objectives"),
        },
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot load model {path}: {exc}") from exc
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise DataError(f"{path}: unsupported model version {doc.get('version')!r}")
    cfg = doc["config"]
    config = SosFitConfig(
        lam=cfg["lambda"], q=cfg["q"], gamma=cfg["gamma"], solver=cfg["solver"],
        max_outer=cfg["outer_max"], outer_tol=cfg["outer_tol"],
        theta_init=cfg["theta_init"], seed=cfg["seed"], scale=cfg["scale"])
    scales = doc["column_scales"]
    return SosModel(
        B=np.asarray(doc["B"], dtype=float),
        Theta=np.asarray(doc["Theta"], dtype=float),
        column_means=np.asarray(doc["column_means"], dtype=float),
        column_scales=None if scales is None else np.asarray(scales, dtype=float),
        centroids=np.asarray(doc["centroids"], dtype=float),
        label_vocab=list(doc["label_vocab"]),
        config=config,
        diagnostics=dict(doc.get("diagnostics", {})),
    )


def load_vector_csv(path):
    """Numeric CSV (no header) flattened to a vector."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=1)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot parse numeric CSV {path}: {exc}") from exc
    return arr.ravel()


def load_matrix_csv(path):
    """Numeric CSV (no header) as a 2-D array."""
    try:
        arr = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot parse numeric CSV {path}: {exc}") from exc
    return arr


def write_rows_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)
