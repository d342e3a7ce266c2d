"""Command-line surface: fit, predict, cv, synth, and bench subcommands.

Exit codes: 0 success, 2 usage errors (argparse), 3 data errors, 4 solver
errors.  Failures print one machine-parsable JSON line on stderr.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import bench
from .classify import evaluate, predict
from .core import Dataset
from .datagen import SynthSpec, sample
from .ennet import SOLVER_IDS, SolverOptions
from .errors import DataError, SolverError
from .fileio import (load_matrix_csv, load_model, load_vector_csv, read_table,
                     save_model, write_dataset_csv, write_predictions_csv,
                     write_rows_csv)
from .penalty import (DensePenalty, DiagonalPenalty, IdentityPenalty,
                      LowRankPenalty, MaternParams, build_matern_omega,
                      low_rank_truncate)
from .sos import SosFitConfig, fit_sos
from .tuning import CvSpec, auto_lambda_bar, cross_validate


class _UsageError(Exception):
    """Bad flag values or flag combinations (exit code 2)."""


def _fit_flags(sp):
    sp.add_argument("--data", required=True)
    sp.add_argument("--label-col", required=True)
    sp.add_argument("--lambda", dest="lam", required=True,
                    help="positive number, or 'auto'")
    sp.add_argument("--gamma", type=float, default=1e-3)
    sp.add_argument("--omega", default="identity",
                    help="identity | diag:PATH | lowrank:PATH | dense:PATH "
                         "| matern:sigma2,rho,nu")
    sp.add_argument("--positions", default=None,
                    help="CSV of coordinates for matern (default: 1-D index 1..p)")
    sp.add_argument("--rank", type=int, default=None,
                    help="truncate a dense/matern omega to this rank")
    sp.add_argument("--solver", choices=SOLVER_IDS, default="sdaap")
    sp.add_argument("--q", type=int, default=None, help="default K-1")
    sp.add_argument("--inner-tol", type=float, default=1e-5)
    sp.add_argument("--inner-max", type=int, default=1000)
    sp.add_argument("--outer-tol", type=float, default=1e-3)
    sp.add_argument("--outer-max", type=int, default=250)
    sp.add_argument("--mu", type=float, default=2.5)
    sp.add_argument("--theta-init", choices=("fixed", "random"), default="fixed")
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--scale", action="store_true",
                    help="divide columns by training standard deviations")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="sosda",
        description="Sparse optimal scoring discriminant analysis")
    sub = ap.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a model on a labeled CSV")
    _fit_flags(fit)
    fit.add_argument("--model", required=True, help="output model JSON")

    pred = sub.add_parser("predict", help="nearest-centroid predictions")
    pred.add_argument("--model", required=True)
    pred.add_argument("--data", required=True)
    pred.add_argument("--out", required=True)

    cv = sub.add_parser("cv", help="cross-validate the l1 weight")
    _fit_flags(cv)
    cv.add_argument("--folds", type=int, default=5)
    cv.add_argument("--sparsity-cap", type=float, default=0.15)
    cv.add_argument("--out", required=True, help="per-lambda CSV (JSON beside it)")
    cv.add_argument("--refit", action="store_true",
                    help="fit a final model at the chosen lambda")
    cv.add_argument("--model", default=None, help="model path for --refit")

    synth = sub.add_parser("synth", help="generate synthetic Gaussian data")
    synth.add_argument("--type", choices=("1", "2"), required=True)
    synth.add_argument("--p", type=int, required=True)
    synth.add_argument("--k", type=int, required=True)
    synth.add_argument("--r", type=float, required=True)
    synth.add_argument("--n-train", type=int, default=25)
    synth.add_argument("--n-test", type=int, default=250)
    synth.add_argument("--block", type=int, default=100)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--out", required=True, help="output directory")

    bn = sub.add_parser("bench", help="benchmark and scaling suites")
    bn.add_argument("--suite", required=True,
                    choices=("type1", "type2", "scaling-p", "scaling-rank"))
    bn.add_argument("--reps", type=int, default=3)
    bn.add_argument("--out", required=True)
    bn.add_argument("--p-grid", default="1000,2000,4000,8000")
    bn.add_argument("--rank-grid", default="5,50,200,400")
    bn.add_argument("--k-grid", default="2,4")
    bn.add_argument("--r-grid", default="0,0.1,0.5,0.9")
    bn.add_argument("--p", type=int, default=500)
    bn.add_argument("--solvers", default="sdap,sdaap,sdad")
    bn.add_argument("--iters", type=int, default=200)
    bn.add_argument("--folds", type=int, default=5)
    bn.add_argument("--n-train", type=int, default=25)
    bn.add_argument("--n-test", type=int, default=250)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--plot", action="store_true",
                    help="write an SVG line chart next to the CSV (scaling suites)")
    return ap


def _build_omega(args, p):
    spec = args.omega
    if spec == "identity":
        omega = IdentityPenalty()
    elif spec.startswith("diag:"):
        u = load_vector_csv(spec[5:])
        if u.shape[0] != p:
            raise DataError(f"diagonal file has {u.shape[0]} entries, data has p={p}")
        omega = DiagonalPenalty(u)
    elif spec.startswith("lowrank:"):
        omega = LowRankPenalty(load_matrix_csv(spec[8:]))
    elif spec.startswith("dense:"):
        omega = DensePenalty(load_matrix_csv(spec[6:]))
    elif spec.startswith("matern:"):
        try:
            s2, rho, nu = (float(v) for v in spec[7:].split(","))
        except ValueError:
            raise _UsageError(f"bad matern spec {spec!r}; expected matern:sigma2,rho,nu")
        positions = (load_matrix_csv(args.positions) if args.positions
                     else np.arange(1.0, p + 1.0))
        omega = build_matern_omega(positions, MaternParams(s2, rho, nu))
    else:
        raise _UsageError(f"unknown omega spec {spec!r}")
    if args.rank is not None:
        if not isinstance(omega, DensePenalty):
            raise _UsageError("--rank applies only to dense/matern omega")
        omega = low_rank_truncate(omega, args.rank)
    return omega


def _dataset_from_args(args):
    X, labels, _ = read_table(args.data, label_col=args.label_col)
    return Dataset.from_labels(X, labels)


def _config_from_args(args, dataset, lam):
    q = args.q if args.q is not None else dataset.K - 1
    inner = SolverOptions(max_iter=args.inner_max, tol=args.inner_tol, mu=args.mu)
    return SosFitConfig(lam=lam, q=q, gamma=args.gamma,
                        omega=_build_omega(args, dataset.p), solver=args.solver,
                        inner=inner, max_outer=args.outer_max,
                        outer_tol=args.outer_tol, theta_init=args.theta_init,
                        seed=args.seed, scale=args.scale)


def _resolve_lambda(args, dataset):
    if args.lam == "auto":
        base = _config_from_args(args, dataset, 0.0)
        lam_bar = auto_lambda_bar(dataset, base)
        return lam_bar, lam_bar
    try:
        lam = float(args.lam)
    except ValueError:
        raise _UsageError(f"--lambda must be a number or 'auto', got {args.lam!r}")
    if lam < 0:
        raise _UsageError("--lambda must be nonnegative")
    return lam, None


def cmd_fit(args):
    dataset = _dataset_from_args(args)
    lam, lam_bar = _resolve_lambda(args, dataset)
    config = _config_from_args(args, dataset, lam)
    model = fit_sos(dataset, config)
    save_model(args.model, model, omega_desc=args.omega)
    labels, _ = predict(model, dataset.features)
    metrics = evaluate(labels, dataset.labels, model.B,
                       time_seconds=model.diagnostics["fit_seconds"])
    line = {
        "lambda": lam,
        "per_direction_outer_iters": model.diagnostics["outer_iterations"],
        "time": model.diagnostics["fit_seconds"],
        "feats": metrics["feats"],
        "fracFeats": metrics["fracFeats"],
        "train_numErr": metrics["numErr"],
        "model": args.model,
    }
    if lam_bar is not None:
        line["lambda_bar"] = lam_bar
    print(json.dumps(line))
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    X, _, _ = read_table(args.data)
    if X.shape[1] != model.p:
        raise DataError(f"model expects p={model.p} columns, data has {X.shape[1]}")
    labels, scores = predict(model, X)
    write_predictions_csv(args.out, labels, scores, model.label_vocab)
    print(json.dumps({"rows": len(labels), "out": args.out}))
    return 0


def cmd_cv(args):
    dataset = _dataset_from_args(args)
    if args.lam == "auto":
        grid = None  # 13-point grid from the ridge-solution weight
    else:
        try:
            grid = [float(v) for v in args.lam.split(",")]
        except ValueError:
            raise _UsageError(
                f"--lambda must be 'auto' or comma-separated numbers, got {args.lam!r}")
        if any(v <= 0 for v in grid):
            raise _UsageError("explicit grid values must be positive")
    base = _config_from_args(args, dataset, 0.0)
    spec = CvSpec(base, folds=args.folds, grid=grid,
                  sparsity_cap=args.sparsity_cap, seed=args.seed)
    result = cross_validate(dataset, spec)
    header, rows = result.csv_rows()
    write_rows_csv(args.out, header, rows)
    json_path = os.path.splitext(args.out)[0] + ".json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=1)
        fh.write("\n")
    line = {"chosen_lambda": result.chosen_lambda,
            "no_admissible": result.no_admissible,
            "lambda_bar": result.lambda_bar,
            "out": args.out, "json": json_path}
    if args.refit:
        if not args.model:
            raise _UsageError("--refit needs --model PATH")
        config = _config_from_args(args, dataset, result.chosen_lambda)
        model = fit_sos(dataset, config)
        save_model(args.model, model, omega_desc=args.omega)
        line["model"] = args.model
    print(json.dumps(line))
    return 0


def cmd_synth(args):
    try:
        spec = SynthSpec(f"type{args.type}", p=args.p, K=args.k, r=args.r,
                         n_train_per_class=args.n_train,
                         n_test_per_class=args.n_test, block=args.block,
                         seed=args.seed)
    except DataError as exc:
        raise _UsageError(str(exc)) from exc
    train, test = sample(spec)
    os.makedirs(args.out, exist_ok=True)
    train_path = os.path.join(args.out, "train.csv")
    test_path = os.path.join(args.out, "test.csv")
    write_dataset_csv(train_path, train)
    write_dataset_csv(test_path, test)
    print(json.dumps({"train": train_path, "test": test_path,
                      "n_train": train.n, "n_test": test.n, "p": spec.p}))
    return 0


def _plot_scaling(rows, x_key, y_key, group_key, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = sorted({r[group_key] for r in rows}) if group_key else [None]
    for g in groups:
        pts = [(r[x_key], r[y_key]) for r in rows
               if group_key is None or r[group_key] == g]
        pts.sort()
        ax.plot([a for a, _ in pts], [b for _, b in pts], marker="o",
                label=str(g) if g is not None else y_key)
    ax.set_xlabel(x_key)
    ax.set_ylabel(y_key)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def cmd_bench(args):
    if args.suite in ("type1", "type2"):
        rows = bench.run_type_suite(
            args.suite, reps=args.reps,
            solvers=tuple(args.solvers.split(",")),
            k_grid=tuple(int(v) for v in args.k_grid.split(",")),
            r_grid=tuple(float(v) for v in args.r_grid.split(",")),
            p=args.p, folds=args.folds, seed0=args.seed,
            n_train_per_class=args.n_train, n_test_per_class=args.n_test)
        header = ["dataset", "measure", "solver", "mean", "sd"]
    elif args.suite == "scaling-p":
        rows = bench.run_scaling_p(
            p_grid=tuple(int(v) for v in args.p_grid.split(",")),
            reps=args.reps, iters=args.iters, seed=args.seed)
        header = ["p", "solver", "per_iter_seconds"]
    else:
        rows = bench.run_scaling_rank(
            ranks=tuple(int(v) for v in args.rank_grid.split(",")),
            reps=args.reps, seed=args.seed)
        header = ["rank", "seconds_total"]
    write_rows_csv(args.out, header, [[r[h] for h in header] for r in rows])
    if args.plot and args.suite == "scaling-p":
        _plot_scaling(rows, "p", "per_iter_seconds", "solver",
                      os.path.splitext(args.out)[0] + ".svg")
    elif args.plot and args.suite == "scaling-rank":
        _plot_scaling(rows, "rank", "seconds_total", None,
                      os.path.splitext(args.out)[0] + ".svg")
    print(json.dumps({"suite": args.suite, "rows": len(rows), "out": args.out}))
    return 0


_COMMANDS = {"fit": cmd_fit, "predict": cmd_predict, "cv": cmd_cv,
             "synth": cmd_synth, "bench": cmd_bench}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return 2
    except DataError as exc:
        print(json.dumps({"error": "data", "message": str(exc)}), file=sys.stderr)
        return 3
    except SolverError as exc:
        print(json.dumps({"error": "solver", "message": str(exc)}), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
