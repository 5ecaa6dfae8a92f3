"""Scikit-learn compatible estimator wrappers.

``LassoCD`` and ``ConservativeLasso`` expose the package's solvers through
the standard ``fit`` / ``predict`` / ``get_params`` surface so they compose
with pipelines, ``clone``, and model-selection utilities.  Both accept an
explicit penalty level ``lam`` or select one by GIC over the conventional
grid when ``lam=None``.

The penalty convention matches the rest of the package: the fitted objective
is ``(1/n) ||y - X b||^2 + 2 lam sum_j w_j |b_j|`` (for sklearn's ``Lasso``
this corresponds to ``alpha = lam``).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .solver import LassoProblem, SolverSettings, fit_lasso
from .tuning import DEFAULT_C2_GRID, _gic_path, default_grid_for
from .weighted import fit_conservative, lambda_prec_default


def _settings(tol, max_sweeps, standardize) -> SolverSettings:
    return SolverSettings(tol=tol, max_sweeps=max_sweeps, standardize=standardize)


class LassoCD(RegressorMixin, BaseEstimator):
    """Lasso fitted by cyclic coordinate descent.

    Parameters
    ----------
    lam : float or None
        Penalty level; ``None`` selects it by GIC over the C2 grid with the
        Lasso exponent 1/8.
    c2_values : tuple
        Grid used when ``lam`` is None.
    tol, max_sweeps, standardize
        Solver controls (see :class:`iclasso.solver.SolverSettings`).

    Attributes
    ----------
    coef_ : ndarray
        Fitted coefficients (no intercept; the design is assumed centered
        by construction of the data-generating process).
    lambda_ : float
        Penalty level actually used.
    kkt_violation_, sweeps_, converged_, support_ : fit metadata.
    gic_scores_ : list, only when the penalty was GIC-selected.
    """

    def __init__(self, lam: float | None = None,
                 c2_values: tuple = DEFAULT_C2_GRID,
                 tol: float = 1e-8, max_sweeps: int = 10_000,
                 standardize: bool = False):
        self.lam = lam
        self.c2_values = c2_values
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        settings = _settings(self.tol, self.max_sweeps, self.standardize)
        if self.lam is None:
            grid = default_grid_for("lasso", X.shape[1], tuple(self.c2_values))
            lam, scores, _ = _gic_path(X, y, grid, "lasso", settings, 1.0)
            self.gic_scores_ = scores
        else:
            lam = float(self.lam)
        fit = fit_lasso(LassoProblem(X=X, y=y, lam=lam), settings=settings)
        self.coef_ = fit.beta_hat
        self.lambda_ = fit.lam
        self.kkt_violation_ = fit.kkt_violation
        self.sweeps_ = fit.sweeps
        self.converged_ = fit.converged
        self.support_ = fit.support
        self.objective_ = fit.objective
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_


class ConservativeLasso(RegressorMixin, BaseEstimator):
    """Two-step weighted Lasso with data-driven penalty weights.

    Step one runs a plain Lasso; step two down-weights coordinates whose
    first-step magnitude exceeds ``lambda_prec`` (default: the penalty level
    itself, scaled by ``lambda_prec_multiplier``).  ``lam=None`` selects the
    penalty by GIC with the conservative exponent 1/12.
    """

    def __init__(self, lam: float | None = None,
                 lambda_prec: float | None = None,
                 lambda_prec_multiplier: float = 1.0,
                 c2_values: tuple = DEFAULT_C2_GRID,
                 tol: float = 1e-8, max_sweeps: int = 10_000,
                 standardize: bool = False):
        self.lam = lam
        self.lambda_prec = lambda_prec
        self.lambda_prec_multiplier = lambda_prec_multiplier
        self.c2_values = c2_values
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.standardize = standardize

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64)
        settings = _settings(self.tol, self.max_sweeps, self.standardize)
        if self.lam is None:
            grid = default_grid_for("conservative", X.shape[1], tuple(self.c2_values))
            lam, scores, _ = _gic_path(X, y, grid, "conservative", settings,
                                       self.lambda_prec_multiplier)
            self.gic_scores_ = scores
        else:
            lam = float(self.lam)
        prec = (self.lambda_prec if self.lambda_prec is not None
                else lambda_prec_default(lam, self.lambda_prec_multiplier))
        cfit = fit_conservative(X, y, lam, lambda_prec=prec, settings=settings)
        self.coef_ = cfit.second_step.beta_hat
        self.first_step_coef_ = cfit.first_step.beta_hat
        self.weights_ = cfit.weights.w
        self.lambda_ = lam
        self.lambda_prec_ = cfit.weights.lambda_prec
        self.kkt_violation_ = cfit.second_step.kkt_violation
        self.converged_ = cfit.first_step.converged and cfit.second_step.converged
        self.support_ = cfit.second_step.support
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return X @ self.coef_
