"""Monte Carlo misreport experiment.

For every cell ``(estimator, p, n, lie)`` the harness fixes the incoming
user's attribute draw once (shared across iterations, lie magnitudes, and
estimators), then repeatedly samples a fresh dataset, selects the penalty by
GIC on that dataset, fits, and accumulates the squared prediction losses
under truthful reporting and under the misreport, together with the exact
loss-gap decomposition.  All randomness is keyed off the master seed through
named substreams, so results are byte-identical for a fixed configuration
regardless of worker count or execution order.
"""
from __future__ import annotations

import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from math import fsum

from .datagen import DgpConfig, build_beta0, sample_dataset, sample_new_user
from .exceptions import ConfigurationError
from .rng import DATASET_STREAM, spawn_seed
from .solver import LassoProblem, SolverSettings, fit_lasso
from .tuning import (DEFAULT_C2_GRID, ESTIMATORS, LASSO_EXPONENT,
                     CONSERVATIVE_EXPONENT, _gic_path, build_grid)
from .weighted import fit_conservative, lambda_prec_default
from . import diagnostics

CSV_COLUMNS = ("estimator", "p", "n", "lie", "truth_mse", "report_mse",
               "lambda_used", "quad", "cross1", "cross2", "iterations", "seed")

PAPER_SCALE_ITERATIONS = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    """Full experiment description; defaults give the desk-scale profile
    (200 iterations; pass ``--paper-scale`` on the CLI for 1000)."""

    p_values: tuple[int, ...] = (100, 200, 300)
    n_values: tuple[int, ...] = (100, 200, 300)
    lies: tuple[float, ...] = (2.0, 0.2)
    estimators: tuple[str, ...] = ("lasso", "conservative")
    iterations: int = 200
    master_seed: int = 1729
    s0: int = 5
    rho: float = 0.5
    noise_sd: float = 1.0
    new_user_df: int = 3
    c2_values: tuple[float, ...] = DEFAULT_C2_GRID
    exponent_override: float | None = None
    lambda_prec_multiplier: float = 1.0
    freeze_lambda: bool = False
    solver: SolverSettings = field(default_factory=SolverSettings)

    def __post_init__(self) -> None:
        if not self.p_values or not self.n_values or not self.lies:
            raise ConfigurationError("p_values, n_values, and lies must be nonempty")
        if not self.estimators:
            raise ConfigurationError("estimators must be a nonempty subset of "
                                     f"{ESTIMATORS}")
        unknown = set(self.estimators) - set(ESTIMATORS)
        if unknown:
            raise ConfigurationError(f"unknown estimators {sorted(unknown)}")
        if self.iterations < 1:
            raise ConfigurationError(f"need iterations >= 1, got {self.iterations}")
        if self.lambda_prec_multiplier <= 0:
            raise ConfigurationError("lambda_prec_multiplier must be positive")

    def exponent_for(self, estimator: str) -> float:
        if self.exponent_override is not None:
            return self.exponent_override
        return LASSO_EXPONENT if estimator == "lasso" else CONSERVATIVE_EXPONENT

    def dgp_template(self, p: int, n: int) -> DgpConfig:
        return DgpConfig(p=p, n=n, s0=self.s0, rho=self.rho,
                         noise_sd=self.noise_sd, seed=0)


@dataclass(frozen=True)
class ICCell:
    """One table cell: mean losses, selected penalty, decomposition means."""

    estimator: str
    p: int
    n: int
    lie: float
    truth_mse: float
    report_mse: float
    lambda_used: float
    quad_mean: float
    cross1_mean: float
    cross2_mean: float
    iterations: int
    seed: int

    @property
    def decomposition_means(self) -> tuple[float, float, float]:
        return (self.quad_mean, self.cross1_mean, self.cross2_mean)


@dataclass(frozen=True)
class CellFailure:
    """Record of a cell aborted by an error (the run continues)."""

    estimator: str
    p: int
    n: int
    lies: tuple[float, ...]
    message: str


class CellExecutionError(RuntimeError):
    """A solver or tuning error aborted a cell; carries the iteration index."""


def _run_lie_group(estimator: str, p: int, n: int, lies: tuple[float, ...],
                   config: ExperimentConfig) -> list[ICCell]:
    """Run all iterations for one ``(estimator, p, n)`` group, scoring every
    lie magnitude against the shared fits."""
    users = {lie: sample_new_user(p, config.new_user_df, lie, config.master_seed)
             for lie in lies}
    beta0 = build_beta0(p, config.s0)
    grid = build_grid(p, exponent=config.exponent_for(estimator),
                      c2_values=config.c2_values)
    template = config.dgp_template(p, n)

    truth_sq: list[float] = []
    lams: list[float] = []
    report_sq = {lie: [] for lie in lies}
    quads = {lie: [] for lie in lies}
    cross1s = {lie: [] for lie in lies}
    cross2s = {lie: [] for lie in lies}

    frozen_lam: float | None = None
    for k in range(config.iterations):
        try:
            ds = sample_dataset(template.with_seed(
                spawn_seed(config.master_seed, DATASET_STREAM, p, n, k)))
            if config.freeze_lambda and frozen_lam is not None:
                lam = frozen_lam
                if estimator == "lasso":
                    beta = fit_lasso(LassoProblem(X=ds.X, y=ds.y, lam=lam),
                                     settings=config.solver).beta_hat
                else:
                    beta = fit_conservative(
                        ds.X, ds.y, lam,
                        lambda_prec=lambda_prec_default(lam, config.lambda_prec_multiplier),
                        settings=config.solver).second_step.beta_hat
            else:
                lam, _, beta = _gic_path(ds.X, ds.y, grid, estimator, config.solver,
                                         config.lambda_prec_multiplier)
                if config.freeze_lambda:
                    frozen_lam = lam
        except Exception as exc:
            raise CellExecutionError(
                f"cell ({estimator}, p={p}, n={n}) failed at iteration {k}: {exc}"
            ) from exc
        lams.append(lam)
        x_new = users[lies[0]].x_new
        ideal = float(x_new @ beta0)
        truth_err = float(x_new @ beta) - ideal
        truth_sq.append(truth_err * truth_err)
        for lie in lies:
            user = users[lie]
            rep_err = float(user.report @ beta) - ideal
            report_sq[lie].append(rep_err * rep_err)
            q, c1, c2 = diagnostics.ic_decomposition(beta, beta0, user)
            quads[lie].append(q)
            cross1s[lie].append(c1)
            cross2s[lie].append(c2)

    m = config.iterations
    truth_mse = fsum(truth_sq) / m
    lam_mean = fsum(lams) / m
    return [ICCell(estimator=estimator, p=p, n=n, lie=lie,
                   truth_mse=truth_mse,
                   report_mse=fsum(report_sq[lie]) / m,
                   lambda_used=lam_mean,
                   quad_mean=fsum(quads[lie]) / m,
                   cross1_mean=fsum(cross1s[lie]) / m,
                   cross2_mean=fsum(cross2s[lie]) / m,
                   iterations=m,
                   seed=config.master_seed)
            for lie in lies]


def run_cell(estimator: str, p: int, n: int, lie: float,
             config: ExperimentConfig) -> ICCell:
    """Run a single experiment cell (one estimator, dimension, and lie)."""
    if estimator not in ESTIMATORS:
        raise ConfigurationError(f"unknown estimator {estimator!r}")
    return _run_lie_group(estimator, p, n, (float(lie),), config)[0]


def _group_worker(args) -> list[ICCell]:
    estimator, p, n, config = args
    return _run_lie_group(estimator, p, n, config.lies, config)


def run_experiment(config: ExperimentConfig,
                   workers: int | None = None) -> tuple[list[ICCell], list[CellFailure]]:
    """Run the Cartesian product of cells in ``config``.

    Returns the completed cells in ``(estimator, p, n, lie)`` order plus a
    list of failures; failed groups do not abort the run.  Output is
    deterministic for a fixed config regardless of ``workers``.
    """
    groups = [(est, p, n) for est in config.estimators
              for p in config.p_values for n in config.n_values]
    results: dict[tuple, list[ICCell] | CellFailure] = {}
    if workers is not None and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {key: pool.submit(_group_worker, (*key, config)) for key in groups}
            for key, fut in futures.items():
                try:
                    results[key] = fut.result()
                except Exception as exc:
                    results[key] = CellFailure(estimator=key[0], p=key[1], n=key[2],
                                               lies=config.lies, message=str(exc))
    else:
        for key in groups:
            try:
                results[key] = _group_worker((*key, config))
            except Exception as exc:
                results[key] = CellFailure(estimator=key[0], p=key[1], n=key[2],
                                           lies=config.lies, message=str(exc))
    cells: list[ICCell] = []
    failures: list[CellFailure] = []
    for key in groups:
        res = results[key]
        if isinstance(res, CellFailure):
            failures.append(res)
        else:
            cells.extend(res)
    return cells, failures


def _csv_value(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_table(cells: list[ICCell], format: str = "csv") -> str:
    """Render cells as ``csv`` (stable round-trip floats), ``json``, or a
    ``text`` grid with one Truth/Report block per (estimator, lie)."""
    if not cells:
        raise ConfigurationError("no cells to emit")
    if format == "csv":
        buf = io.StringIO()
        buf.write(",".join(CSV_COLUMNS) + "\n")
        for c in cells:
            row = (c.estimator, c.p, c.n, c.lie, c.truth_mse, c.report_mse,
                   c.lambda_used, c.quad_mean, c.cross1_mean, c.cross2_mean,
                   c.iterations, c.seed)
            buf.write(",".join(_csv_value(v) for v in row) + "\n")
        return buf.getvalue()
    if format == "json":
        records = [{col: getattr(c, attr) for col, attr in zip(
            CSV_COLUMNS, ("estimator", "p", "n", "lie", "truth_mse", "report_mse",
                          "lambda_used", "quad_mean", "cross1_mean", "cross2_mean",
                          "iterations", "seed"))} for c in cells]
        return json.dumps(records, indent=2) + "\n"
    if format == "text":
        return _text_table(cells)
    raise ConfigurationError(f"unknown format {format!r}; expected csv, json, or text")


def _text_table(cells: list[ICCell]) -> str:
    groups: dict[tuple[str, float], list[ICCell]] = {}
    for c in cells:
        groups.setdefault((c.estimator, c.lie), []).append(c)
    out = io.StringIO()
    for (estimator, lie), group in groups.items():
        ns = sorted({c.n for c in group})
        ps = sorted({c.p for c in group})
        by_pn = {(c.p, c.n): c for c in group}
        out.write(f"{estimator}, lie={lie:g} "
                  f"(iterations={group[0].iterations}, seed={group[0].seed})\n")
        header = "      " + "".join(f"{'n=' + str(n):>22}" for n in ns)
        sub = "   p  " + "".join(f"{'Truth':>11}{'Report':>11}" for _ in ns)
        out.write(header + "\n" + sub + "\n")
        for p in ps:
            row = f"{p:4d}  "
            for n in ns:
                c = by_pn.get((p, n))
                if c is None:
                    row += f"{'-':>11}{'-':>11}"
                else:
                    row += f"{c.truth_mse:11.4f}{c.report_mse:11.4f}"
            out.write(row + "\n")
        out.write("\n")
    return out.getvalue()
