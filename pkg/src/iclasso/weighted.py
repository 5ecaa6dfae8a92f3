"""Two-step Conservative Lasso.

Step one runs a plain Lasso and keeps every variable; step two re-solves the
problem with data-driven penalty weights

    w_j = lambda_prec / max(|beta1_j|, lambda_prec)

so coordinates estimated clearly away from zero in step one receive a
strictly smaller penalty, while coordinates at (or near) zero keep the full
weight of one.  With all weights equal to one the procedure reduces to the
standard Lasso.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .solver import DEFAULT_SETTINGS, Fit, LassoProblem, SolverSettings, fit_lasso


@dataclass(frozen=True)
class WeightVector:
    """Second-step penalty weights together with the threshold that made them."""

    w: np.ndarray
    lambda_prec: float


@dataclass(frozen=True)
class ConservativeFit:
    """Both stages of the two-step fit; ``second_step`` holds the estimator."""

    first_step: Fit
    weights: WeightVector
    second_step: Fit


def compute_weights(first_step_beta: np.ndarray, lambda_prec: float) -> WeightVector:
    """Penalty weights ``lambda_prec / max(|beta_j|, lambda_prec)``.

    A first-step coefficient at zero (or below the threshold) keeps weight
    one; larger coefficients get proportionally smaller weights, never below
    zero and never above one.
    """
    if lambda_prec <= 0:
        raise ConfigurationError(f"need lambda_prec > 0, got {lambda_prec}")
    beta = np.asarray(first_step_beta, dtype=float)
    w = lambda_prec / np.maximum(np.abs(beta), lambda_prec)
    return WeightVector(w=w, lambda_prec=float(lambda_prec))


def lambda_prec_default(lambda_n: float, multiplier: float = 1.0) -> float:
    """Operational weight threshold: ``multiplier * lambda_n``.

    The theoretical threshold (see :func:`lambda_prec_theoretical`) scales
    with the tuning parameter but involves unobservable population
    quantities; this surrogate keeps the scaling and exposes the constant.
    """
    if lambda_n <= 0 or multiplier <= 0:
        raise ConfigurationError("lambda_n and multiplier must be positive")
    return multiplier * lambda_n


def lambda_prec_theoretical(lambda_n: float, theta_linf: float, t1: float,
                            s0: int, phi_sq: float) -> float:
    """Reference form of the weight threshold from the sup-norm error bound:

        theta_linf * (lambda_n / 2 + t1 * 24 * lambda_n * s0 / phi_sq + lambda_n)

    where ``theta_linf`` bounds the precision-matrix row sums, ``t1`` is the
    covariance concentration level, and ``phi_sq`` the restricted eigenvalue.
    As ``t1`` vanishes this tends to ``1.5 * theta_linf * lambda_n``, which
    motivates the default multiplier range of :func:`lambda_prec_default`.
    """
    if min(lambda_n, theta_linf, phi_sq) <= 0 or s0 < 1 or t1 < 0:
        raise ConfigurationError("arguments must be positive (t1 may be zero)")
    return theta_linf * (lambda_n / 2.0 + t1 * 24.0 * lambda_n * s0 / phi_sq + lambda_n)


def fit_conservative(X: np.ndarray, y: np.ndarray, lambda_n: float,
                     lambda_prec: float | None = None,
                     settings: SolverSettings = DEFAULT_SETTINGS,
                     init: np.ndarray | None = None,
                     second_init: np.ndarray | None = None) -> ConservativeFit:
    """Run the two-step estimator at penalty level ``lambda_n``.

    Step one is an unweighted Lasso fit; step two re-fits with weights from
    :func:`compute_weights` at the same ``lambda_n``.  ``lambda_prec``
    defaults to ``lambda_prec_default(lambda_n)``.  ``init`` and
    ``second_init`` warm-start the respective steps (the second step falls
    back to warm-starting from step one).
    """
    if lambda_n <= 0:
        raise ConfigurationError(f"need lambda_n > 0, got {lambda_n}")
    if lambda_prec is None:
        lambda_prec = lambda_prec_default(lambda_n)
    first = fit_lasso(LassoProblem(X=X, y=y, lam=lambda_n), init=init, settings=settings)
    weights = compute_weights(first.beta_hat, lambda_prec)
    warm = second_init if second_init is not None else first.beta_hat
    second = fit_lasso(LassoProblem(X=X, y=y, lam=lambda_n, weights=weights.w),
                       init=warm, settings=settings)
    return ConservativeFit(first_step=first, weights=weights, second_step=second)
