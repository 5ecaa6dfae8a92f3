"""Synthetic data generation for the misreport simulation design.

The sampled regression is ``y = X @ beta0 + u`` with rows of ``X`` drawn from
``N(0, Sigma)`` for a Toeplitz ``Sigma[j, m] = rho ** |j - m|``, a sparse
coefficient vector holding ``s0`` unit entries, and i.i.d. Gaussian noise.
The incoming user's true attributes are i.i.d. Student-t draws (raw, not
rescaled to unit variance); her report adds a constant offset to every
coordinate.

Note: the noise law is N(0, noise_sd^2) by convention; only its moments are
pinned down by the underlying theory.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .exceptions import ConfigurationError, NumericError
from .rng import NEW_USER_STREAM, substream


@dataclass(frozen=True)
class DgpConfig:
    """Parameters of the synthetic data-generating process.

    Parameters
    ----------
    p, n : int
        Number of covariates and sample size.
    s0 : int
        Sparsity: number of unit entries in the true coefficient vector.
    rho : float
        Base of the Toeplitz covariance, ``Sigma[j, m] = rho ** |j - m|``.
    noise_sd : float
        Standard deviation of the additive noise.
    seed : int
        64-bit seed; the sampled dataset is a pure function of the config.
    """

    p: int
    n: int
    s0: int = 5
    rho: float = 0.5
    noise_sd: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if not (1 <= self.s0 <= self.p):
            raise ConfigurationError(f"need 1 <= s0 <= p, got s0={self.s0}, p={self.p}")
        if self.n < 2:
            raise ConfigurationError(f"need n >= 2, got n={self.n}")
        if not (0.0 <= self.rho < 1.0):
            raise ConfigurationError(f"need rho in [0, 1), got rho={self.rho}")
        if self.noise_sd <= 0:
            raise ConfigurationError(f"need noise_sd > 0, got {self.noise_sd}")

    def with_seed(self, seed: int) -> "DgpConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class Dataset:
    """One synthetic sample: design, response, and the generating truth."""

    X: np.ndarray
    y: np.ndarray
    beta0: np.ndarray
    u: np.ndarray
    config: DgpConfig | None = None


@dataclass(frozen=True)
class NewUser:
    """True attributes of the incoming user and the vector she reports."""

    x_new: np.ndarray
    report: np.ndarray

    @property
    def lie_vector(self) -> np.ndarray:
        return self.report - self.x_new


def build_beta0(p: int, s0: int) -> np.ndarray:
    """Sparse truth ``(1, 0, ..., 0, 1, ..., 1)``: a leading unit entry, a
    zero block of length ``p - s0``, then ``s0 - 1`` trailing unit entries."""
    if not (1 <= s0 <= p):
        raise ConfigurationError(f"need 1 <= s0 <= p, got s0={s0}, p={p}")
    beta0 = np.zeros(p)
    beta0[0] = 1.0
    if s0 > 1:
        beta0[p - (s0 - 1):] = 1.0
    return beta0


def toeplitz_sigma(p: int, rho: float) -> np.ndarray:
    """Toeplitz covariance with entries ``rho ** |j - m|`` (unit diagonal)."""
    if not abs(rho) < 1.0:
        raise ConfigurationError(f"need |rho| < 1, got rho={rho}")
    idx = np.arange(p)
    return rho ** np.abs(idx[:, None] - idx[None, :])


@lru_cache(maxsize=32)
def _cholesky_cached(p: int, rho: float) -> np.ndarray:
    sigma = toeplitz_sigma(p, rho)
    try:
        chol = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError as exc:
        raise NumericError(
            "Cholesky factorization failed: covariance not positive definite "
            f"(p={p}, rho={rho}, cond={np.linalg.cond(sigma):.3e})"
        ) from exc
    chol.setflags(write=False)
    return chol


def sample_dataset(config: DgpConfig, rng: np.random.Generator | None = None) -> Dataset:
    """Draw one dataset from the process described by ``config``.

    ``X`` rows are ``L @ z`` for the lower-triangular Cholesky factor ``L`` of
    the Toeplitz covariance and standard-normal ``z``; noise entries are
    ``noise_sd * N(0, 1)``.  With ``rng=None`` the draw is a pure function of
    ``config.seed``; passing a generator lets callers key the draw off their
    own substream scheme.
    """
    chol = _cholesky_cached(config.p, config.rho)
    if rng is None:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(int(config.seed))))
    X = rng.standard_normal((config.n, config.p)) @ chol.T
    u = config.noise_sd * rng.standard_normal(config.n)
    beta0 = build_beta0(config.p, config.s0)
    y = X @ beta0 + u
    return Dataset(X=X, y=y, beta0=beta0, u=u, config=config)


def sample_new_user(p: int, df: int, lie: float, seed: int) -> NewUser:
    """Draw the incoming user's fixed attribute vector and her report.

    Attributes are p i.i.d. Student-t(df) variates built as ``z / sqrt(c/df)``
    from a seeded normal stream ``z`` and an independent chi-square stream
    ``c``.  The streams are keyed only by ``seed``, so the draw is unaffected
    by the sample size and is prefix-stable in ``p``; the same seed yields the
    same attributes for every lie magnitude and every estimator.  The report
    adds the constant ``lie`` to every coordinate.
    """
    if p < 1:
        raise ConfigurationError(f"need p >= 1, got p={p}")
    if df < 1:
        raise ConfigurationError(f"need df >= 1, got df={df}")
    z = substream(seed, NEW_USER_STREAM, 0).standard_normal(p)
    chi = substream(seed, NEW_USER_STREAM, 1).chisquare(df, p)
    x_new = z / np.sqrt(chi / df)
    return NewUser(x_new=x_new, report=x_new + float(lie))


def dataset_to_csv(X: np.ndarray, y: np.ndarray) -> str:
    """Serialize observations as ``y,x1,...,xp`` lines with round-trip floats."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ConfigurationError("X must be (n, p) and y must be (n,) with matching n")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["y"] + [f"x{j}" for j in range(1, X.shape[1] + 1)])
    for i in range(X.shape[0]):
        writer.writerow([repr(float(y[i]))] + [repr(float(v)) for v in X[i]])
    return buf.getvalue()


def dataset_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse a ``y,x1,...,xp`` CSV back into ``(X, y)`` arrays."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "y":
        raise ConfigurationError("expected header row 'y,x1,...,xp'")
    p = len(header) - 1
    ys: list[float] = []
    rows: list[list[float]] = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != p + 1:
            raise ConfigurationError(f"line {lineno}: expected {p + 1} fields, got {len(row)}")
        ys.append(float(row[0]))
        rows.append([float(v) for v in row[1:]])
    if not rows:
        raise ConfigurationError("no observations found")
    return np.asarray(rows, dtype=float), np.asarray(ys, dtype=float)
