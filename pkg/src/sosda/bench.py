"""Benchmark and scaling harnesses behind the ``bench`` CLI subcommand.

Three experiment shapes:

* ``type1`` / ``type2``: the full synthetic pipeline (generate, N-fold CV
  over the automatic grid, refit at the chosen weight, evaluate held-out
  data) across a (K, r) grid, reported as mean (sd) rows per metric.
* ``scaling-p``: per-iteration wall time of each solver as the feature
  count grows, with a diagonal regularizer (plus the ADMM linear-solve
  alone as ``sdad_xupdate``).
* ``scaling-rank``: total runtime of the accelerated solver as the rank of
  a truncated inverse-Matern regularizer grows at fixed p.

The scaling harnesses run fixed iteration budgets (tolerance 0) so timings
compare like with like across p or rank.
"""

import time

import numpy as np

from .classify import evaluate, predict
from .datagen import SynthSpec, sample
from .ennet import SolverOptions, Subproblem, admm_x_update, solve_subproblem
from .penalty import (DiagonalPenalty, MaternParams, build_matern_omega,
                      low_rank_truncate)
from .sos import SosFitConfig, fit_sos
from .tuning import CvSpec, cross_validate

TYPE_MEASURES = ("numErr", "fracErr", "feats", "fracFeats", "time")


def replication_cell(kind, p, K, r, solver, seeds, folds=5, sparsity_cap=0.15,
                     n_train_per_class=25, n_test_per_class=250,
                     theta_init="fixed", n_jobs=None):
    """Generate/CV/fit/evaluate once per seed; returns one metrics dict per seed."""
    out = []
    for seed in seeds:
        spec = SynthSpec(kind, p=p, K=K, r=r,
                         n_train_per_class=n_train_per_class,
                         n_test_per_class=n_test_per_class, seed=seed)
        train, test = sample(spec)
        base = SosFitConfig(lam=0.0, q=K - 1, solver=solver,
                            theta_init=theta_init, seed=seed)
        cv = cross_validate(train, CvSpec(base, folds=folds,
                                          sparsity_cap=sparsity_cap, seed=seed),
                            n_jobs=n_jobs)
        t0 = time.perf_counter()
        model = fit_sos(train, SosFitConfig(lam=cv.chosen_lambda, q=K - 1,
                                            solver=solver, theta_init=theta_init,
                                            seed=seed))
        elapsed = time.perf_counter() - t0
        labels, _ = predict(model, test.features)
        metrics = evaluate(labels, test.labels, model.B, time_seconds=elapsed)
        metrics["chosen_lambda"] = cv.chosen_lambda
        out.append(metrics)
    return out


def run_type_suite(kind, reps=5, solvers=("sdap", "sdaap", "sdad"),
                   k_grid=(2, 4), r_grid=(0.0, 0.1, 0.5, 0.9), p=500,
                   folds=5, sparsity_cap=0.15, seed0=0, n_train_per_class=25,
                   n_test_per_class=250, n_jobs=None):
    """Mean (sd) rows in the schema {dataset, measure, solver, mean, sd}."""
    rows = []
    for K in k_grid:
        for r in r_grid:
            dataset = f"{kind}_p{p}_K{K}_r{r:g}"
            for solver in solvers:
                seeds = [seed0 + i for i in range(reps)]
                cells = replication_cell(kind, p, K, r, solver, seeds,
                                         folds=folds, sparsity_cap=sparsity_cap,
                                         n_train_per_class=n_train_per_class,
                                         n_test_per_class=n_test_per_class,
                                         n_jobs=n_jobs)
                for measure in TYPE_MEASURES:
                    vals = np.array([c[measure] for c in cells], dtype=float)
                    rows.append({"dataset": dataset, "measure": measure,
                                 "solver": solver,
                                 "mean": float(vals.mean()),
                                 "sd": float(vals.std(ddof=1)) if reps > 1 else 0.0})
    return rows


def _timing_subproblem(rng, n, p):
    X = rng.standard_normal((n, p))
    X -= X.mean(axis=0)
    d = rng.standard_normal(p)
    omega = DiagonalPenalty(rng.uniform(0.5, 1.5, p))
    return Subproblem(X, d, 1e-3, 1e-3, omega)


def per_iteration_seconds(sub, solver, iters):
    """Wall time per iteration over a fixed budget (tolerance zero)."""
    opts = SolverOptions(max_iter=iters, tol=0.0)
    t0 = time.perf_counter()
    res = solve_subproblem(sub, opts, method=solver)
    return (time.perf_counter() - t0) / res.iterations


def admm_xupdate_seconds(sub, mu, iters):
    """Wall time per linear-system solve; the first call pays the factorization."""
    rng = np.random.default_rng(0)
    b = rng.standard_normal(sub.p)
    admm_x_update(sub, mu, b)  # factorize and warm allocations before timing
    t0 = time.perf_counter()
    for _ in range(iters):
        admm_x_update(sub, mu, b)
    return (time.perf_counter() - t0) / iters


def run_scaling_p(p_grid=(1000, 2000, 4000, 8000), n=50, reps=3, iters=200,
                  solvers=("sdap", "sdapbt", "sdaap", "sdaapbt", "sdad"),
                  seed=0):
    """Rows {p, solver, per_iter_seconds} with medians over ``reps``."""
    rows = []
    for p in p_grid:
        rng = np.random.default_rng(seed)
        sub = _timing_subproblem(rng, n, p)
        for solver in solvers:
            med = float(np.median([per_iteration_seconds(sub, solver, iters)
                                   for _ in range(reps)]))
            rows.append({"p": p, "solver": solver, "per_iter_seconds": med})
        med = float(np.median([admm_xupdate_seconds(sub, 2.5, iters)
                               for _ in range(reps)]))
        rows.append({"p": p, "solver": "sdad_xupdate", "per_iter_seconds": med})
    return rows


def run_scaling_rank(ranks=(5, 50, 200, 400), p=640, reps=3, K=3,
                     n_per_class=100, inner_iters=300, outer_iters=3, seed=0):
    """Rows {rank, seconds_total}: truncation plus a fixed-budget accelerated fit.

    The dense inverse-Matern matrix is built once outside the timed region;
    each timed run re-truncates it to rank r and fits with lam = 1e-3,
    gamma = 1e-1 on a synthetic K-class set.
    """
    params = MaternParams(sigma2=1.0, rho=1.0, nu=0.5)
    dense = build_matern_omega(np.arange(1.0, p + 1.0), params)
    spec = SynthSpec("type1", p=p, K=K, r=0.5, n_train_per_class=n_per_class,
                     n_test_per_class=2, seed=seed)
    train, _ = sample(spec)
    rows = []
    for r in ranks:
        times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            omega = low_rank_truncate(dense, r)
            cfg = SosFitConfig(
                lam=1e-3, q=K - 1, gamma=1e-1, omega=omega, solver="sdaap",
                inner=SolverOptions(max_iter=inner_iters, tol=0.0),
                max_outer=outer_iters, outer_tol=1e-300)
            fit_sos(train, cfg)
            times.append(time.perf_counter() - t0)
        rows.append({"rank": r, "seconds_total": float(np.median(times))})
    return rows
