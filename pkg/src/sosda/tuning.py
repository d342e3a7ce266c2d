"""l1-weight grid construction and stratified N-fold cross-validation.

The automatic grid spans lambda_bar / 2^c for c = 9, 8, ..., -3 (13 values,
ascending), with lambda_bar computed from the first-direction subproblem at
the configured initial scoring vector.  A grid value is admissible when its
mean fitted-feature fraction stays within ``sparsity_cap``; among admissible
values the one with the fewest mean validation errors wins, ties broken
toward the larger (sparser) value.
"""

import os
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, delayed

from .classify import evaluate, predict
from .core import build_indicator, center_data
from .ennet import Subproblem
from .errors import DataError, TrivialDirectionError
from .sos import (ScoringState, SosFitConfig, compute_lambda_bar, fit_sos,
                  initial_theta)


@dataclass
class CvSpec:
    base: SosFitConfig
    folds: int = 5
    grid: list | None = None
    sparsity_cap: float = 0.15
    seed: int | None = None

    def __post_init__(self):
        if self.folds < 2:
            raise DataError("need at least 2 folds")
        if not 0.0 < self.sparsity_cap <= 1.0:
            raise DataError("sparsity_cap must lie in (0, 1]")


@dataclass
class CvResult:
    records: list
    chosen_lambda: float
    no_admissible: bool
    folds: int
    seed: int | None
    lambda_bar: float | None
    theta_init: str

    def csv_rows(self):
        header = ["lambda", "mean_err", "mean_frac_feats", "admissible"]
        rows = [[r["lambda"], r["mean_err"], r["mean_frac_feats"],
                 int(r["admissible"])] for r in self.records]
        return header, rows

    def to_dict(self):
        return {
            "chosen_lambda": self.chosen_lambda,
            "no_admissible": self.no_admissible,
            "folds": self.folds,
            "seed": self.seed,
            "lambda_bar": self.lambda_bar,
            "theta_init": self.theta_init,
            "records": [
                {k: v for k, v in r.items()} for r in self.records
            ],
        }


def lambda_grid(lambda_bar):
    """The 13-point grid lambda_bar / 2^c, c = 9, ..., 0, -1, -2, -3, ascending."""
    if lambda_bar <= 0:
        raise DataError("lambda_bar must be positive")
    return [lambda_bar / 2.0 ** c for c in range(9, -4, -1)]


def make_folds(n, N, labels, seed=None):
    """Stratified fold ids: per class, shuffle and deal round-robin.

    The round-robin counter continues across classes, so every fold is
    nonempty whenever N <= n.
    """
    if N > n:
        raise DataError(f"cannot make {N} folds from {n} observations")
    if N < 2:
        raise DataError("need at least 2 folds")
    rng = np.random.default_rng(seed)
    fold = np.empty(n, dtype=int)
    by_class = {}
    for i, lab in enumerate(labels):
        by_class.setdefault(lab, []).append(i)
    slot = 0
    for lab in by_class:
        idx = np.array(by_class[lab])
        rng.shuffle(idx)
        for i in idx:
            fold[i] = slot % N
            slot += 1
    return fold


def auto_lambda_bar(dataset, base):
    """lambda_bar of the first-direction subproblem at the initial scoring vector."""
    centered = center_data(dataset.features, scale=base.scale)
    indicator = build_indicator(dataset.labels, dataset.label_vocab)
    state = ScoringState.initial(indicator)
    theta0 = initial_theta(state, base.theta_init,
                           np.random.default_rng(base.seed))
    d = -2.0 * (centered.X.T @ (indicator.Y @ theta0))
    sub = Subproblem(centered.X, d, base.gamma, 0.0, base.omega)
    return compute_lambda_bar(sub)


def _fit_and_score(dataset, train_idx, val_idx, config):
    train = dataset.subset(train_idx)
    val = dataset.subset(val_idx)
    try:
        model = fit_sos(train, config)
    except TrivialDirectionError:
        # large lambda legitimately zeroes the direction: worst-case errors
        return len(val_idx), 0.0, True
    labels, _ = predict(model, val.features)
    metrics = evaluate(labels, val.labels, model.B)
    return metrics["numErr"], metrics["fracFeats"], False


def cross_validate(dataset, cvspec, n_jobs=None):
    """Pick the l1 weight by stratified N-fold cross-validation.

    ``n_jobs`` defaults to the THREADS environment variable (1 when unset);
    the (lambda, fold) tasks are independent and reduced in grid order, so
    the result does not depend on scheduling.
    """
    base = cvspec.base
    lambda_bar = None
    if cvspec.grid is None:
        lambda_bar = auto_lambda_bar(dataset, base)
        grid = lambda_grid(lambda_bar)
    else:
        grid = sorted(float(l) for l in cvspec.grid)
        if not grid or grid[0] <= 0:
            raise DataError("explicit grid must contain positive values")
    folds = make_folds(dataset.n, cvspec.folds, dataset.labels, cvspec.seed)
    splits = []
    for f in range(cvspec.folds):
        train_idx = np.flatnonzero(folds != f)
        val_idx = np.flatnonzero(folds == f)
        train_classes = {dataset.labels[i] for i in train_idx}
        missing = [lab for lab in dataset.label_vocab if lab not in train_classes]
        if missing:
            raise DataError(
                f"class {missing[0]!r} absent from the fold-{f} training split; "
                "use fewer folds")
        splits.append((train_idx, val_idx))
    if n_jobs is None:
        n_jobs = int(os.environ.get("THREADS", "1"))
    tasks = [(li, fi) for li in range(len(grid)) for fi in range(cvspec.folds)]
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_and_score)(dataset, splits[fi][0], splits[fi][1],
                                replace(base, lam=grid[li]))
        for li, fi in tasks)
    records = []
    for li, lam in enumerate(grid):
        per_fold = [results[li * cvspec.folds + fi] for fi in range(cvspec.folds)]
        errs = [r[0] for r in per_fold]
        fracs = [r[1] for r in per_fold]
        records.append({
            "lambda": lam,
            "mean_err": float(np.mean(errs)),
            "mean_frac_feats": float(np.mean(fracs)),
            "admissible": bool(np.mean(fracs) <= cvspec.sparsity_cap),
            "fold_errs": errs,
            "fold_frac_feats": fracs,
            "fold_trivial": [r[2] for r in per_fold],
        })
    admissible = [r for r in records if r["admissible"]]
    if admissible:
        best_err = min(r["mean_err"] for r in admissible)
        chosen = max(r["lambda"] for r in admissible if r["mean_err"] == best_err)
        no_admissible = False
    else:
        best_frac = min(r["mean_frac_feats"] for r in records)
        chosen = max(r["lambda"] for r in records
                     if r["mean_frac_feats"] == best_frac)
        no_admissible = True
    return CvResult(records, chosen, no_admissible, cvspec.folds, cvspec.seed,
                    lambda_bar, base.theta_init)
