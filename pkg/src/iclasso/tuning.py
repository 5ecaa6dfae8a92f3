"""Tuning-parameter grid and GIC selection.

The candidate penalties come from the one-parameter family

    lambda(C2) = (2 + C2 / (ln p)^2) ** exponent

with exponent 1/8 for the Lasso and 1/12 for the Conservative Lasso.  Every
grid value exceeds one by construction, which keeps the penalty above the
overfitting regime that creates an incentive to misreport; the grid is then
searched with the Generalized Information Criterion

    GIC(lambda) = ln(sigma_hat^2(lambda)) + (s_hat(lambda) / n) * ln(n) * ln(ln p).
"""
from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigurationError
from .solver import DEFAULT_SETTINGS, LassoProblem, SolverSettings, fit_lasso
from .weighted import compute_weights, lambda_prec_default

DEFAULT_C2_GRID = (0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0)
LASSO_EXPONENT = 1.0 / 8.0
CONSERVATIVE_EXPONENT = 1.0 / 12.0
SIGMA_SQ_FLOOR = 1e-12

ESTIMATORS = ("lasso", "conservative")


@dataclass(frozen=True)
class TuningGrid:
    """Candidate penalty levels derived from the C2 family."""

    c2_values: tuple[float, ...]
    exponent: float
    p: int
    lambdas: tuple[float, ...]


@dataclass(frozen=True)
class GicScore:
    """One grid point: penalty level, fit summary, and criterion value."""

    lam: float
    sigma_hat_sq: float
    s_hat: int
    score: float
    c2: float


def build_grid(p: int,
               exponent: float = LASSO_EXPONENT,
               c2_values: tuple[float, ...] = DEFAULT_C2_GRID) -> TuningGrid:
    """Construct the penalty grid ``(2 + C2 / (ln p)^2) ** exponent``."""
    if p < 3:
        raise ConfigurationError(f"need p >= 3 so ln(ln p) is positive, got p={p}")
    if exponent <= 0:
        raise ConfigurationError(f"need exponent > 0, got {exponent}")
    c2 = tuple(float(v) for v in c2_values)
    if not c2:
        raise ConfigurationError("c2_values must be nonempty")
    if any(v <= 0 for v in c2):
        raise ConfigurationError("c2_values must be positive")
    log_p_sq = math.log(p) ** 2
    lambdas = tuple((2.0 + v / log_p_sq) ** exponent for v in c2)
    return TuningGrid(c2_values=c2, exponent=float(exponent), p=int(p), lambdas=lambdas)


def default_grid_for(estimator: str, p: int,
                     c2_values: tuple[float, ...] = DEFAULT_C2_GRID) -> TuningGrid:
    """Grid with the exponent conventional for ``estimator``."""
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")
    expo = LASSO_EXPONENT if estimator == "lasso" else CONSERVATIVE_EXPONENT
    return build_grid(p, exponent=expo, c2_values=c2_values)


def _gic_path(X, y, grid: TuningGrid, estimator: str,
              settings: SolverSettings, lambda_prec_multiplier: float,
              warm_start: bool = True):
    """Fit every grid penalty (descending, warm-started) and score it.

    Returns ``(lambda_star, scores, beta_star)`` with ``scores`` in grid
    order and ``beta_star`` the coefficient vector fitted at the selected
    penalty (the second-step vector for the conservative estimator).
    """
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"unknown estimator {estimator!r}; expected one of {ESTIMATORS}")
    if not grid.lambdas:
        raise ConfigurationError("empty tuning grid")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    pen_per_coef = math.log(n) * math.log(math.log(grid.p)) / n

    order = np.argsort(grid.lambdas)[::-1]  # descending penalty
    by_index: dict[int, GicScore] = {}
    best: tuple[float, float, np.ndarray] | None = None  # (score, lam, beta)
    b1_prev = None
    b2_prev = None
    for i in order:
        lam = grid.lambdas[i]
        first = fit_lasso(LassoProblem(X=X, y=y, lam=lam),
                          init=b1_prev if warm_start else None, settings=settings)
        if estimator == "lasso":
            beta = first.beta_hat
            b1_prev = beta
        else:
            weights = compute_weights(first.beta_hat,
                                      lambda_prec_default(lam, lambda_prec_multiplier))
            warm = b2_prev if (warm_start and b2_prev is not None) else first.beta_hat
            second = fit_lasso(LassoProblem(X=X, y=y, lam=lam, weights=weights.w),
                               init=warm, settings=settings)
            beta = second.beta_hat
            b1_prev = first.beta_hat
            b2_prev = beta
        resid = y - X @ beta
        sigma_sq = float(resid @ resid / n)
        if sigma_sq < SIGMA_SQ_FLOOR:
            warnings.warn(
                f"degenerate fit at lambda={lam:.6g}: mean squared residual "
                f"{sigma_sq:.3e} floored at {SIGMA_SQ_FLOOR:g} in the GIC score",
                RuntimeWarning, stacklevel=3)
            sigma_sq_for_score = SIGMA_SQ_FLOOR
        else:
            sigma_sq_for_score = sigma_sq
        s_hat = int(np.count_nonzero(np.abs(beta) > settings.support_tol))
        score = math.log(sigma_sq_for_score) + s_hat * pen_per_coef
        by_index[i] = GicScore(lam=float(lam), sigma_hat_sq=sigma_sq,
                               s_hat=s_hat, score=float(score), c2=grid.c2_values[i])
        # Strict improvement only: on ties the earlier (larger) penalty wins.
        if best is None or score < best[0]:
            best = (score, float(lam), beta.copy())
    scores = [by_index[i] for i in range(len(grid.lambdas))]
    assert best is not None
    return best[1], scores, best[2]


def gic_select(X, y, grid: TuningGrid, estimator: str = "lasso",
               settings: SolverSettings = DEFAULT_SETTINGS,
               lambda_prec_multiplier: float = 1.0,
               warm_start: bool = True) -> tuple[float, list[GicScore]]:
    """Select the GIC-minimizing penalty from ``grid`` for ``estimator``.

    Fits are warm-started along the grid in descending penalty order (the
    selected value is warm-start independent up to solver tolerance); ties
    break toward the largest penalty, the safer side for truthful reporting.
    """
    lam_star, scores, _ = _gic_path(X, y, grid, estimator, settings,
                                    lambda_prec_multiplier, warm_start)
    return lam_star, scores


def scores_to_csv(scores: list[GicScore], lambda_star: float) -> str:
    """Render grid scores as ``c2,lambda,sigma_hat_sq,s_hat,gic_score,selected``."""
    buf = io.StringIO()
    buf.write("c2,lambda,sigma_hat_sq,s_hat,gic_score,selected\n")
    for s in scores:
        buf.write(f"{repr(s.c2)},{repr(s.lam)},{repr(s.sigma_hat_sq)},"
                  f"{s.s_hat},{repr(s.score)},{int(s.lam == lambda_star)}\n")
    return buf.getvalue()


def ic_lower_bound_ok(lam: float, p_fc_estimate: float, s0: int,
                      s1: float = 1.0, rule: str = "lasso") -> bool:
    """Check the truth-telling lower bound on the tuning parameter.

    Rule ``"lasso"`` requires ``lam >= pfc^(1/8) / s0^(1/2)``; rule
    ``"conservative"`` requires ``lam`` to clear the larger of
    ``pfc^(1/8) / (s0^(1/4) s1^(1/2))`` and ``pfc^(1/12) / (s0^(1/3) s1^(1/3))``,
    with ``pfc`` an estimate of the exception probability that the noise and
    restricted-eigenvalue events fail.
    """
    if not (0.0 <= p_fc_estimate <= 1.0):
        raise ConfigurationError(f"p_fc_estimate must be in [0, 1], got {p_fc_estimate}")
    if s0 < 1 or s1 <= 0:
        raise ConfigurationError("need s0 >= 1 and s1 > 0")
    pfc = float(p_fc_estimate)
    if rule == "lasso":
        bound = pfc ** (1.0 / 8.0) / math.sqrt(s0)
    elif rule == "conservative":
        bound = max(pfc ** (1.0 / 8.0) / (s0 ** 0.25 * math.sqrt(s1)),
                    pfc ** (1.0 / 12.0) / ((s0 * s1) ** (1.0 / 3.0)))
    else:
        raise ConfigurationError(f"unknown rule {rule!r}")
    return lam >= bound
