"""Empirical diagnostics behind the truth-telling guarantees.

This module measures, by Monte Carlo, the quantities the theory reasons
about: the noise-control event (penalty dominates twice the maximal
regressor-noise correlation), the restricted-eigenvalue event (the empirical
cone-restricted eigenvalue stays above half its population value), the
probability that either fails, moment bounds for the estimation error, the
maximal cross-product statistics, and the exact per-realization decomposition
of the misreport loss gap.

The cone-restricted minimum is approximated by sampling: random directions
are projected into the cone and the realized estimation-error direction is
added.  A sampled minimum can only overestimate the true infimum, so the
reported eigenvalues are upper bounds; both the empirical and population
values share the same directions, which keeps their ratio informative.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, is_dataclass
from math import fsum

import numpy as np

from .datagen import Dataset, DgpConfig, NewUser, sample_dataset, toeplitz_sigma
from .exceptions import ConfigurationError
from .rng import CONE_STREAM, EXCEPTION_STREAM, MOMENT_STREAM, spawn_seed, substream
from .solver import DEFAULT_SETTINGS, LassoProblem, SolverSettings, fit_lasso
from .weighted import fit_conservative, lambda_prec_default


@dataclass(frozen=True)
class EventReport:
    """Noise and restricted-eigenvalue event indicators for one dataset."""

    a1_holds: bool
    a2_holds: bool
    noise_stat: float
    re_estimate: float
    re_population: float


@dataclass(frozen=True)
class MomentReport:
    """Monte Carlo moment estimates for the l1 error and l1 norm."""

    k: int
    mean_l1_error_k: float
    mean_l1_norm_k: float
    error_moment_ratio: float
    norm_moment_ratio: float
    reps: int


@dataclass(frozen=True)
class MaxStats:
    """Maximal cross-product and misreport statistics."""

    m1: float
    m2: float
    m3: float
    m4: float


def compute_max_stats(dataset: Dataset, new_user: NewUser) -> MaxStats:
    """Compute the four maximal statistics for one realization.

    ``m1`` is the largest absolute regressor-noise product, ``m2`` the
    largest deviation of a regressor cross product from its known population
    value, ``m3`` the sup norm of the user's true attributes, and ``m4`` the
    sup norm of her misreport.
    """
    if dataset.config is None:
        raise ConfigurationError("dataset must carry its generating config for m2")
    X, u = dataset.X, dataset.u
    sigma = toeplitz_sigma(dataset.config.p, dataset.config.rho)
    m1 = float(np.abs(X * u[:, None]).max())
    m2 = 0.0
    for i in range(X.shape[0]):
        dev = np.abs(np.outer(X[i], X[i]) - sigma).max()
        if dev > m2:
            m2 = float(dev)
    m3 = float(np.abs(new_user.x_new).max())
    m4 = float(np.abs(new_user.report - new_user.x_new).max())
    return MaxStats(m1=m1, m2=m2, m3=m3, m4=m4)


def _project_into_cone(directions: np.ndarray, support: np.ndarray, s0: int) -> np.ndarray:
    """Scale off-support blocks so every row satisfies the cone constraint

    ``||d_offsupport||_1 <= 3 * sqrt(s0) * ||d_support||_2``.
    """
    D = np.array(directions, dtype=float)
    on = D[:, support]
    norm_s = np.sqrt(np.einsum("ij,ij->i", on, on))
    comp = ~support
    norm_c = np.abs(D[:, comp]).sum(axis=1)
    cap = 3.0 * math.sqrt(s0) * norm_s
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(norm_c > cap, cap / np.where(norm_c > 0, norm_c, 1.0), 1.0)
    D[:, comp] *= factor[:, None]
    return D


def _cone_minimum(directions: np.ndarray, gram: np.ndarray, support: np.ndarray) -> float:
    """Minimum of ``d' G d / ||d_support||_2^2`` over the given directions."""
    quad = np.einsum("ij,ij->i", directions @ gram, directions)
    on = directions[:, support]
    den = np.einsum("ij,ij->i", on, on)
    keep = den > 0
    if not keep.any():
        raise ConfigurationError("no valid cone directions (all have zero support block)")
    return float(np.min(quad[keep] / den[keep]))


def check_events(dataset: Dataset, lam: float, cone_samples: int = 1000,
                 seed: int = 0, settings: SolverSettings = DEFAULT_SETTINGS) -> EventReport:
    """Evaluate the noise and restricted-eigenvalue events on one dataset.

    The noise statistic ``2 * ||u'X / n||_inf`` is exact (the dataset carries
    the true noise).  The restricted eigenvalues are sampled-cone minima of
    ``d' S d / ||d_support||_2^2`` for the empirical and the known population
    second-moment matrices, over ``cone_samples`` projected random directions
    plus the realized estimation-error direction at penalty ``lam``.
    """
    if dataset.config is None:
        raise ConfigurationError("dataset must carry its generating config")
    if cone_samples < 1:
        raise ConfigurationError(f"need cone_samples >= 1, got {cone_samples}")
    X, y, u, beta0 = dataset.X, dataset.y, dataset.u, dataset.beta0
    n, p = X.shape
    noise_stat = float(2.0 * np.abs(u @ X / n).max())

    support = beta0 != 0
    s0 = int(support.sum())
    rng = substream(seed, CONE_STREAM)
    directions = rng.standard_normal((cone_samples, p))
    fit = fit_lasso(LassoProblem(X=X, y=y, lam=lam), settings=settings)
    err = fit.beta_hat - beta0
    if np.abs(err[support]).max() > 0:
        directions = np.vstack([directions, err[None, :]])
    directions = _project_into_cone(directions, support, s0)

    sigma_hat = X.T @ X / n
    sigma_pop = toeplitz_sigma(p, dataset.config.rho)
    re_estimate = _cone_minimum(directions, sigma_hat, support)
    re_population = _cone_minimum(directions, sigma_pop, support)
    return EventReport(a1_holds=noise_stat <= lam,
                       a2_holds=re_estimate >= re_population / 2.0,
                       noise_stat=noise_stat,
                       re_estimate=re_estimate,
                       re_population=re_population)


def estimate_exception_probability(config: DgpConfig, lam: float, reps: int,
                                   seed: int, cone_samples: int = 1000,
                                   settings: SolverSettings = DEFAULT_SETTINGS) -> float:
    """Monte Carlo estimate of the probability that either event fails.

    Fresh datasets are drawn from substreams of ``seed``; on a fixed seed the
    estimate is deterministic and non-increasing in ``lam`` (a larger penalty
    weakly enlarges the noise event).
    """
    if reps < 1:
        raise ConfigurationError(f"need reps >= 1, got {reps}")
    failures = 0
    for k in range(reps):
        ds = sample_dataset(config, rng=substream(seed, EXCEPTION_STREAM, k))
        report = check_events(ds, lam, cone_samples=cone_samples,
                              seed=spawn_seed(seed, EXCEPTION_STREAM, k, 1), settings=settings)
        if not (report.a1_holds and report.a2_holds):
            failures += 1
    return failures / reps


def estimate_moment_bounds(config: DgpConfig, estimator: str, lam: float, k: int,
                           reps: int, seed: int,
                           lambda_prec_multiplier: float = 1.0,
                           settings: SolverSettings = DEFAULT_SETTINGS) -> MomentReport:
    """Monte Carlo estimates of ``E||bhat - b0||_1^k`` and ``E||bhat||_1^k``.

    ``error_moment_ratio`` rescales the k-th root of the error moment by
    ``s0 * lam`` and ``norm_moment_ratio`` rescales the norm moment by
    ``sqrt(s0)``; boundedness of these ratios across sample sizes is the
    testable content of the moment bounds (their constants are not
    identified).
    """
    if k < 1:
        raise ConfigurationError(f"need k >= 1, got {k}")
    if reps < 30:
        raise ConfigurationError(f"need reps >= 30 for a stable moment estimate, got {reps}")
    if estimator not in ("lasso", "conservative"):
        raise ConfigurationError(f"unknown estimator {estimator!r}")
    err_terms: list[float] = []
    norm_terms: list[float] = []
    for rep in range(reps):
        ds = sample_dataset(config, rng=substream(seed, MOMENT_STREAM, rep))
        if estimator == "lasso":
            beta = fit_lasso(LassoProblem(X=ds.X, y=ds.y, lam=lam), settings=settings).beta_hat
        else:
            beta = fit_conservative(
                ds.X, ds.y, lam,
                lambda_prec=lambda_prec_default(lam, lambda_prec_multiplier),
                settings=settings).second_step.beta_hat
        err_terms.append(float(np.abs(beta - ds.beta0).sum()) ** k)
        norm_terms.append(float(np.abs(beta).sum()) ** k)
    mean_err = fsum(err_terms) / reps
    mean_norm = fsum(norm_terms) / reps
    return MomentReport(k=k,
                        mean_l1_error_k=mean_err,
                        mean_l1_norm_k=mean_norm,
                        error_moment_ratio=mean_err ** (1.0 / k) / (config.s0 * lam),
                        norm_moment_ratio=mean_norm ** (1.0 / k) / math.sqrt(config.s0),
                        reps=reps)


def ic_decomposition(fit_beta: np.ndarray, beta0: np.ndarray,
                     new_user: NewUser) -> tuple[float, float, float]:
    """Exact decomposition of the misreport loss gap for one realization.

    With ``D = report - x_new`` the squared-error difference between lying
    and truth equals ``quad + cross1 + cross2`` where ``quad = (D'bhat)^2``
    and the cross terms couple the misreport with the estimation error:
    ``cross1 = (bhat'D) * (x_new'(bhat - b0))`` and symmetrically ``cross2``.
    The identity holds per realization up to rounding.
    """
    beta = np.asarray(fit_beta, dtype=float)
    beta0 = np.asarray(beta0, dtype=float)
    if beta.shape != beta0.shape or beta.shape != new_user.x_new.shape:
        raise ConfigurationError("fit_beta, beta0, and new_user must share one length")
    D = new_user.report - new_user.x_new
    bd = float(beta @ D)
    xe = float(new_user.x_new @ (beta - beta0))
    quad = bd * bd
    cross1 = bd * xe
    cross2 = xe * bd
    return quad, cross1, cross2


def check_ic_condition(s0: int, n: int, p: int, m3: float, m4: float,
                       exponent_variant: str = "three_halves") -> float:
    """Size of the growth condition ``s0^e * sqrt(ln p / n) * m3 * m4``.

    ``e`` is 3/2 under the bounded-signal assumption and 2 under the relaxed
    ``sqrt(s0)``-scale signal assumption; the caller judges smallness.
    """
    if n < 3:
        raise ConfigurationError(f"need n >= 3, got {n}")
    if p < 2:
        raise ConfigurationError(f"need p >= 2, got {p}")
    if exponent_variant == "three_halves":
        expo = 1.5
    elif exponent_variant == "two":
        expo = 2.0
    else:
        raise ConfigurationError(f"unknown exponent_variant {exponent_variant!r}")
    return float(s0 ** expo * math.sqrt(math.log(p) / n) * m3 * m4)


def report_record(op: str, config, seed: int, payload) -> dict:
    """Wrap a diagnostic result as a JSON-ready record keyed by
    ``(module, op, config hash, seed)``."""
    if is_dataclass(config) and not isinstance(config, type):
        config = asdict(config)
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    if is_dataclass(payload) and not isinstance(payload, type):
        payload = asdict(payload)
    return {
        "module": "diagnostics",
        "op": op,
        "config_hash": hashlib.sha256(blob).hexdigest()[:16],
        "seed": int(seed),
        "config": config,
        "report": payload,
    }
