"""Command-line interface: ``sparselogit {fit,experiment,design,kappa}``."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .design_lab import (RANDOM_DISTRIBUTIONS, RandomDesignSpec, WreParams, build_shatter_matrix_W,
                         build_worst_case_X0, estimate_kappa_wre, sample_margin_response, sample_random_design,
                         save_design_csv, save_response_csv, unit_normalize_columns)
from .errors import ConfigError, ContractViolation, CsvFormatError, EnumerationGuardError
from .experiment.config import ExperimentConfig, load_config, resolve_seed
from .experiment.data import load_csv_dataset, load_features_csv
from .experiment.harness import Tuning, cross_validate, fit_estimator
from .experiment.report import FORMATS, emit_report
from .risk_eval import LinearClassifier, classify


def _cmd_fit(args) -> int:
    X, y = load_csv_dataset(args.features, args.response)
    cfg = ExperimentConfig(scenario="csv_benchmark", features_csv=args.features, response_csv=args.response,
                           penalty_c=args.penalty_c, slope_a=args.slope_A, c0=args.c0,
                           lasso_lambda=args.lasso_lambda, delta=args.delta, max_size=args.max_size,
                           estimators=(args.estimator,))
    tun = Tuning.from_config(cfg)
    Xa = X.entries
    norms = None
    if args.normalize:
        Z, norms = unit_normalize_columns(Xa)
        Xa = Z.entries
    out = {"estimator": args.estimator, "n": int(Xa.shape[0]), "d": int(Xa.shape[1])}
    if args.cv:
        grid = [float(v) for v in args.cv.split(",")]
        cv = cross_validate(Xa, y, args.estimator, grid, tun, seed=args.seed)
        tun = tun.with_constant(args.estimator, cv.chosen)
        out["cv"] = {"grid": cv.candidate_grid.tolist(), "error": cv.cv_error_curve.tolist(), "chosen": cv.chosen,
                     "skipped_folds": list(cv.skipped_folds)}
    beta, info = fit_estimator(args.estimator, Xa, y, tun)
    train_err = float(np.mean(classify(LinearClassifier(beta), Xa) != y))
    if norms is not None:
        beta = beta / norms
    out.update(beta=beta.tolist(), support=[X.feature_names[j] for j in np.flatnonzero(beta)],
               training_error=train_err, below_floor=bool(info.get("below_floor", False)))
    json.dump(out, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def _cmd_experiment(args) -> int:
    cfg = resolve_seed(load_config(args.config), args.seed)
    from .experiment.harness import run_experiment
    report = run_experiment(cfg, workers=args.workers)
    fmts = FORMATS if args.format == "all" else (args.format,)
    for fmt in fmts:
        for p in emit_report(report, fmt, args.out):
            print(p)
    return 0


def _cmd_design(args) -> int:
    rng = np.random.default_rng(args.seed)
    if args.kind == "W":
        X = build_shatter_matrix_W(args.d0, args.d)
        beta = None
    elif args.kind == "X0":
        D = build_worst_case_X0(args.d0, args.d, args.n, args.h, args.kappa)
        X = D.X.entries
        beta = D.beta_for(rng.integers(0, 2, size=D.V))
    else:
        X = sample_random_design(RandomDesignSpec(args.distribution, args.d), args.n, rng).entries
        beta = None
    save_design_csv(args.out, X)
    print(args.out)
    if args.response:
        if beta is None:
            raise ContractViolation("--response is only available for the X0 design")
        save_response_csv(args.response, sample_margin_response(X, beta, rng).y)
        print(args.response)
    return 0


def _cmd_kappa(args) -> int:
    X, _ = load_features_csv(args.features, normalize=True)
    est = estimate_kappa_wre(X, WreParams(args.d0, args.c0), budget=args.budget, seed=args.seed)
    json.dump({"kappa_estimate": est.value, "direction": est.u.tolist(), "candidates": est.starts,
               "note": est.note}, sys.stdout, indent=1, sort_keys=True)
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparselogit", description="Sparse logistic regression classifiers")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit one estimator to a CSV dataset")
    f.add_argument("--features", required=True)
    f.add_argument("--response", required=True)
    f.add_argument("--estimator", choices=("exhaustive", "forward", "slope", "lasso"), default="forward")
    f.add_argument("--penalty-c", type=float, default=None, dest="penalty_c")
    f.add_argument("--delta", type=float, default=0.05)
    f.add_argument("--max-size", type=int, default=None, dest="max_size")
    f.add_argument("--slope-A", type=float, default=None, dest="slope_A")
    f.add_argument("--lasso-lambda", type=float, default=None, dest="lasso_lambda")
    f.add_argument("--c0", type=float, default=3.0)
    f.add_argument("--normalize", action="store_true", help="scale columns to unit norm before fitting")
    f.add_argument("--cv", default=None, help="comma-separated candidate grid for 5-fold CV")
    f.add_argument("--seed", type=int, default=0)
    f.set_defaults(func=_cmd_fit)

    e = sub.add_parser("experiment", help="run a configured Monte Carlo study")
    e.add_argument("--config", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--format", choices=FORMATS + ("all",), default="all")
    e.set_defaults(func=_cmd_experiment)

    d = sub.add_parser("design", help="write a W, X0 or random design to CSV")
    d.add_argument("kind", choices=("W", "X0", "random"))
    d.add_argument("--d0", type=int, default=1)
    d.add_argument("--d", type=int, required=True)
    d.add_argument("--n", type=int, default=100)
    d.add_argument("--h", type=float, default=0.0)
    d.add_argument("--kappa", type=int, default=None)
    d.add_argument("--distribution", choices=RANDOM_DISTRIBUTIONS, default="gaussian_rescaled")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--out", required=True)
    d.add_argument("--response", default=None, help="also draw a response for X0 and write it here")
    d.set_defaults(func=_cmd_design)

    k = sub.add_parser("kappa", help="estimate the WRE constant of a CSV design")
    k.add_argument("--features", required=True)
    k.add_argument("--d0", type=int, required=True)
    k.add_argument("--c0", type=float, default=3.0)
    k.add_argument("--budget", type=int, default=10_000)
    k.add_argument("--seed", type=int, default=0)
    k.set_defaults(func=_cmd_kappa)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ContractViolation, CsvFormatError, EnumerationGuardError, OSError) as exc:
        print(f"sparselogit: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
