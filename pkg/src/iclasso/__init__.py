"""Lasso and Conservative Lasso with a truth-telling-aware tuning rule, and a
Monte Carlo harness measuring whether a strategic user gains by misreporting
her covariates."""

from .datagen import (DgpConfig, Dataset, NewUser, build_beta0, dataset_from_csv,
                      dataset_to_csv, sample_dataset, sample_new_user, toeplitz_sigma)
from .diagnostics import (EventReport, MaxStats, MomentReport, check_events,
                          check_ic_condition, compute_max_stats,
                          estimate_exception_probability, estimate_moment_bounds,
                          ic_decomposition, report_record)
from .estimators import ConservativeLasso, LassoCD
from .exceptions import ConfigurationError, DegenerateColumnError, NumericError
from .experiment import (CellFailure, ExperimentConfig, ICCell, emit_table,
                         run_cell, run_experiment)
from .solver import (Fit, LassoProblem, SolverSettings, check_kkt, fit_lasso,
                     objective_value, predict, soft_threshold)
from .tuning import (DEFAULT_C2_GRID, CONSERVATIVE_EXPONENT, GicScore,
                     LASSO_EXPONENT, TuningGrid, build_grid, gic_select,
                     ic_lower_bound_ok, scores_to_csv)
from .weighted import (ConservativeFit, WeightVector, compute_weights,
                       fit_conservative, lambda_prec_default, lambda_prec_theoretical)

__version__ = "0.1.0"

__all__ = [
    "CellFailure", "ConfigurationError", "ConservativeFit", "ConservativeLasso",
    "CONSERVATIVE_EXPONENT", "Dataset", "DEFAULT_C2_GRID", "DegenerateColumnError",
    "DgpConfig", "EventReport", "ExperimentConfig", "Fit", "GicScore", "ICCell",
    "LASSO_EXPONENT", "LassoCD", "LassoProblem", "MaxStats", "MomentReport",
    "NewUser", "NumericError", "SolverSettings", "TuningGrid", "WeightVector",
    "build_beta0", "build_grid", "check_events", "check_ic_condition", "check_kkt",
    "compute_max_stats", "compute_weights", "dataset_from_csv", "dataset_to_csv",
    "emit_table", "estimate_exception_probability", "estimate_moment_bounds",
    "fit_conservative", "fit_lasso", "gic_select", "ic_decomposition",
    "ic_lower_bound_ok", "lambda_prec_default", "lambda_prec_theoretical",
    "objective_value", "predict", "report_record", "run_cell", "run_experiment",
    "sample_dataset", "sample_new_user", "scores_to_csv", "soft_threshold",
    "toeplitz_sigma",
]
