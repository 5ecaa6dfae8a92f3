"""Command-line interface.

Subcommands
-----------
simulate   run the Monte Carlo misreport experiment and emit the cell table
fit        fit one estimator to a CSV dataset (``y,x1,...,xp``) and report it
tune       score the penalty grid by GIC on a CSV dataset
diagnose   event/moment/misreport diagnostics for a synthetic configuration

Every flag can also be supplied through ``--config FILE`` holding flat
``key = value`` lines (same names as the flags, dashes or underscores);
explicit flags override file values.  Exit codes: 0 success, 1 cell failure,
2 configuration error.
"""
from __future__ import annotations

import json
import sys
from dataclasses import asdict

import numpy as np

from .datagen import DgpConfig, dataset_from_csv, sample_dataset, sample_new_user
from .diagnostics import (check_events, check_ic_condition, compute_max_stats,
                          estimate_exception_probability, estimate_moment_bounds,
                          report_record)
from .exceptions import ConfigurationError
from .experiment import (PAPER_SCALE_ITERATIONS, ExperimentConfig, emit_table,
                         run_experiment)
from .solver import DEFAULT_SETTINGS, LassoProblem, fit_lasso
from .tuning import (DEFAULT_C2_GRID, LASSO_EXPONENT, build_grid, default_grid_for,
                     gic_select, ic_lower_bound_ok, scores_to_csv, _gic_path)
from .weighted import fit_conservative, lambda_prec_default

import argparse


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _str_list(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value file mirroring the flags")
    sub.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="iclasso", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="command", required=True)

    sim = subs.add_parser("simulate", help="run the misreport Monte Carlo experiment")
    _add_common(sim)
    sim.add_argument("--p", type=_int_list, default=(100, 200, 300),
                     help="comma list of covariate counts")
    sim.add_argument("--n", type=_int_list, default=(100, 200, 300),
                     help="comma list of sample sizes")
    sim.add_argument("--lie", type=_float_list, default=(2.0, 0.2),
                     help="comma list of constant misreport offsets")
    sim.add_argument("--estimator", type=_str_list, default=("lasso", "conservative"),
                     help="comma subset of lasso,conservative")
    sim.add_argument("--iterations", type=int, default=200)
    sim.add_argument("--paper-scale", action="store_true",
                     help=f"use {PAPER_SCALE_ITERATIONS} iterations")
    sim.add_argument("--seed", type=int, default=1729, help="master seed")
    sim.add_argument("--s0", type=int, default=5)
    sim.add_argument("--rho", type=float, default=0.5)
    sim.add_argument("--noise-sd", type=float, default=1.0)
    sim.add_argument("--df", type=int, default=3, help="new-user t degrees of freedom")
    sim.add_argument("--c2-grid", type=_float_list, default=DEFAULT_C2_GRID)
    sim.add_argument("--exponent", type=float, default=None,
                     help="override the per-estimator grid exponent")
    sim.add_argument("--lambda-prec-mult", type=float, default=1.0)
    sim.add_argument("--freeze-lambda", action="store_true",
                     help="select the penalty once (first iteration) per cell")
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--format", choices=("csv", "json", "text"), default="csv")

    fit = subs.add_parser("fit", help="fit one estimator to a CSV dataset")
    _add_common(fit)
    fit.add_argument("data", help="CSV file with header y,x1,...,xp")
    fit.add_argument("--estimator", choices=("lasso", "conservative"), default="lasso")
    fit.add_argument("--lam", type=float, default=None,
                     help="penalty level; omit to select by GIC")
    fit.add_argument("--c2-grid", type=_float_list, default=DEFAULT_C2_GRID)
    fit.add_argument("--exponent", type=float, default=None)
    fit.add_argument("--lambda-prec-mult", type=float, default=1.0)
    fit.add_argument("--format", choices=("json",), default="json")

    tune = subs.add_parser("tune", help="score the penalty grid by GIC")
    _add_common(tune)
    tune.add_argument("data", help="CSV file with header y,x1,...,xp")
    tune.add_argument("--estimator", choices=("lasso", "conservative"), default="lasso")
    tune.add_argument("--c2-grid", type=_float_list, default=DEFAULT_C2_GRID)
    tune.add_argument("--exponent", type=float, default=None)
    tune.add_argument("--lambda-prec-mult", type=float, default=1.0)
    tune.add_argument("--format", choices=("csv",), default="csv")

    diag = subs.add_parser("diagnose", help="event, moment, and misreport diagnostics")
    _add_common(diag)
    diag.add_argument("--p", type=int, default=100)
    diag.add_argument("--n", type=int, default=200)
    diag.add_argument("--s0", type=int, default=5)
    diag.add_argument("--rho", type=float, default=0.5)
    diag.add_argument("--noise-sd", type=float, default=1.0)
    diag.add_argument("--df", type=int, default=3)
    diag.add_argument("--seed", type=int, default=1729)
    diag.add_argument("--lam", type=float, default=None,
                      help="penalty level; default: smallest grid value")
    diag.add_argument("--lie", type=float, default=2.0)
    diag.add_argument("--estimator", choices=("lasso", "conservative"), default="lasso")
    diag.add_argument("--reps", type=int, default=200)
    diag.add_argument("--cone-samples", type=int, default=1000)
    diag.add_argument("--k", type=_int_list, default=(1, 2), help="moment orders")
    diag.add_argument("--s1", type=float, default=1.0,
                      help="precision-matrix row-sum scale for the bound check")
    diag.add_argument("--lambda-prec-mult", type=float, default=1.0)
    return parser


def _config_file_args(path: str) -> list[str]:
    """Translate a flat key=value file into synthetic CLI arguments."""
    args: list[str] = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigurationError(f"{path}:{lineno}: empty key")
        if key in ("config",):
            raise ConfigurationError(f"{path}:{lineno}: 'config' cannot be nested")
        flag = "--" + key.replace("_", "-")
        lowered = value.lower()
        if lowered in _TRUE:
            args.append(flag)
        elif lowered in _FALSE:
            pass
        else:
            args.extend([flag, value])
    return args


def _write_output(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_simulate(args) -> int:
    iterations = PAPER_SCALE_ITERATIONS if args.paper_scale else args.iterations
    config = ExperimentConfig(
        p_values=tuple(args.p), n_values=tuple(args.n), lies=tuple(args.lie),
        estimators=tuple(args.estimator), iterations=iterations,
        master_seed=args.seed, s0=args.s0, rho=args.rho, noise_sd=args.noise_sd,
        new_user_df=args.df, c2_values=tuple(args.c2_grid),
        exponent_override=args.exponent,
        lambda_prec_multiplier=args.lambda_prec_mult,
        freeze_lambda=args.freeze_lambda)
    cells, failures = run_experiment(config, workers=args.workers)
    if cells:
        _write_output(emit_table(cells, format=args.format), args.out)
    for failure in failures:
        print(f"cell failed: {failure}", file=sys.stderr)
    return 1 if failures else 0


def _load_csv(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return dataset_from_csv(fh.read())
    except OSError as exc:
        raise ConfigurationError(f"cannot read {path}: {exc}") from exc


def _cmd_fit(args) -> int:
    X, y = _load_csv(args.data)
    if args.lam is None:
        grid = (build_grid(X.shape[1], args.exponent, tuple(args.c2_grid))
                if args.exponent is not None
                else default_grid_for(args.estimator, X.shape[1], tuple(args.c2_grid)))
        lam, scores, _ = _gic_path(X, y, grid, args.estimator, DEFAULT_SETTINGS,
                                   args.lambda_prec_mult)
    else:
        lam, scores = float(args.lam), None
    if args.estimator == "lasso":
        fit = fit_lasso(LassoProblem(X=X, y=y, lam=lam))
        report = {
            "estimator": "lasso",
            "lambda": fit.lam,
            "objective": fit.objective,
            "kkt_violation": fit.kkt_violation,
            "sweeps": fit.sweeps,
            "converged": fit.converged,
            "support": list(fit.support),
            "coefficients": fit.beta_hat.tolist(),
        }
    else:
        cfit = fit_conservative(X, y, lam,
                                lambda_prec=lambda_prec_default(lam, args.lambda_prec_mult))
        report = {
            "estimator": "conservative",
            "lambda": lam,
            "lambda_prec": cfit.weights.lambda_prec,
            "objective": cfit.second_step.objective,
            "kkt_violation": cfit.second_step.kkt_violation,
            "sweeps": cfit.first_step.sweeps + cfit.second_step.sweeps,
            "converged": cfit.first_step.converged and cfit.second_step.converged,
            "support": list(cfit.second_step.support),
            "coefficients": cfit.second_step.beta_hat.tolist(),
            "first_step_coefficients": cfit.first_step.beta_hat.tolist(),
            "weights": cfit.weights.w.tolist(),
        }
    if scores is not None:
        report["gic"] = [asdict(s) for s in scores]
    _write_output(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def _cmd_tune(args) -> int:
    X, y = _load_csv(args.data)
    grid = (build_grid(X.shape[1], args.exponent, tuple(args.c2_grid))
            if args.exponent is not None
            else default_grid_for(args.estimator, X.shape[1], tuple(args.c2_grid)))
    lam_star, scores = gic_select(X, y, grid, estimator=args.estimator,
                                  lambda_prec_multiplier=args.lambda_prec_mult)
    _write_output(scores_to_csv(scores, lam_star), args.out)
    return 0


def _cmd_diagnose(args) -> int:
    config = DgpConfig(p=args.p, n=args.n, s0=args.s0, rho=args.rho,
                       noise_sd=args.noise_sd, seed=args.seed)
    lam = args.lam if args.lam is not None else build_grid(args.p, LASSO_EXPONENT).lambdas[0]
    records = []

    dataset = sample_dataset(config)
    user = sample_new_user(args.p, args.df, args.lie, args.seed)
    stats = compute_max_stats(dataset, user)
    records.append(report_record("compute_max_stats", config, args.seed, stats))

    events = check_events(dataset, lam, cone_samples=args.cone_samples, seed=args.seed)
    records.append(report_record("check_events", config, args.seed,
                                 {**asdict(events), "lambda": lam}))

    pfc = estimate_exception_probability(config, lam, reps=args.reps, seed=args.seed,
                                         cone_samples=args.cone_samples)
    records.append(report_record("estimate_exception_probability", config, args.seed,
                                 {"lambda": lam, "reps": args.reps, "estimate": pfc}))

    for k in args.k:
        mom = estimate_moment_bounds(config, args.estimator, lam, k,
                                     reps=max(args.reps, 30), seed=args.seed,
                                     lambda_prec_multiplier=args.lambda_prec_mult)
        records.append(report_record("estimate_moment_bounds", config, args.seed,
                                     {**asdict(mom), "estimator": args.estimator,
                                      "lambda": lam}))

    condition = {
        "three_halves": check_ic_condition(args.s0, args.n, args.p, stats.m3, stats.m4),
        "two": check_ic_condition(args.s0, args.n, args.p, stats.m3, stats.m4,
                                  exponent_variant="two"),
    }
    records.append(report_record("check_ic_condition", config, args.seed, condition))

    bounds = {
        "lambda": lam,
        "p_fc_estimate": pfc,
        "lasso": ic_lower_bound_ok(lam, pfc, args.s0, args.s1, "lasso"),
        "conservative": ic_lower_bound_ok(lam, pfc, args.s0, args.s1,
                                          "conservative"),
    }
    records.append(report_record("ic_lower_bound_ok", config, args.seed, bounds))

    _write_output(json.dumps(records, indent=2, default=_json_default) + "\n", args.out)
    return 0


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(f"not JSON serializable: {type(obj)}")


_COMMANDS = {
    "simulate": _cmd_simulate,
    "fit": _cmd_fit,
    "tune": _cmd_tune,
    "diagnose": _cmd_diagnose,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        try:
            file_args = _config_file_args(args.config)
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        args = parser.parse_args([argv[0], *file_args, *argv[1:]])
    try:
        return _COMMANDS[args.command](args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
