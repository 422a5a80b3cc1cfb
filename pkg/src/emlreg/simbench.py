"""Simulation designs, error distributions, and grid-based evaluation metrics.

Covariates are i.i.d. U(0,1)^d. The low-dimensional signals x_j = X' b_j
use sparse block coefficient vectors with unit L1 norm, so x_j stays in
[0,1]. Three targets of effective dimension 5, 10, and 20 are provided,
with four error distributions. Bias/SD/RMSE are computed on a fixed grid
shared by all replications.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import ndtri

from .neuralnet import forward
from .numerics import RngState

__all__ = [
    "ErrorKind",
    "ScenarioConfig",
    "Dataset",
    "MetricsReport",
    "make_beta",
    "beta_matrix",
    "target_g",
    "target_values",
    "sample_error",
    "sample_errors",
    "generate_scenario",
    "compute_bias_sd_rmse",
    "prediction_error",
    "residual_qq_data",
]

GAMMA_L1 = 210.0  # |1 + 2 + ... + 20|


class ErrorKind(Enum):
    NORMAL_STD = "normal"
    MIXTURE_GAUSS = "mixture"
    STUDENT_T2 = "t2"
    HETERO = "hetero"


@dataclass(frozen=True)
class ScenarioConfig:
    """Recipe for one simulation scenario."""

    p: int
    d: int
    n: int
    error: ErrorKind
    n_grid: int = 2048
    replications: int = 100
    master_seed: int = 0
    scale_is_variance: bool = True  # read N(0, s) second parameter as variance

    def __post_init__(self):
        if self.p not in (5, 10, 20):
            raise ValueError("p must be 5, 10 or 20")
        if self.d < self.p:
            raise ValueError("d must be >= p")
        if self.n < 2:
            raise ValueError("n must be >= 2")


@dataclass
class Dataset:
    """Design matrix X [n x d], responses Y [n], optional noiseless targets."""

    X: np.ndarray
    Y: np.ndarray
    g_true: np.ndarray = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.X.shape[0] != self.Y.shape[0]:
            raise ValueError("X and Y row counts differ")

    @property
    def n(self):
        return self.X.shape[0]


@dataclass
class MetricsReport:
    bias: float
    sd: float
    rmse: float
    labels: dict = None


def make_beta(j, d, p):
    """Sparse block coefficient vector b_j of length d with unit L1 norm.

    The block at positions (j-1)*floor(d/p) .. j*floor(d/p)-1 (0-based)
    holds r = floor(d/(20p)) copies of (1, ..., 20) scaled by 1/(r*210);
    if 20p does not divide d, the copies fill the first 20r slots of the
    block and the rest of the block stays zero. All other entries are 0.
    """
    if not 1 <= j <= p:
        raise ValueError(f"j must lie in 1..{p}")
    if d < p:
        raise ValueError("d must be >= p")
    block = d // p
    r = d // (20 * p)
    if r == 0:
        raise ValueError(f"unsupported dimension: need d >= {20 * p} for p={p}")
    gamma = np.arange(1.0, 21.0)
    beta = np.zeros(d)
    start = (j - 1) * block
    beta[start : start + 20 * r] = np.tile(gamma, r) / (r * GAMMA_L1)
    return beta


def beta_matrix(d, p):
    """All p coefficient vectors stacked as a d x p matrix."""
    return np.column_stack([make_beta(j, d, p) for j in range(1, p + 1)])


def _g5(x):
    return x[..., 0] ** 3 + x[..., 1] ** 2 + x[..., 2] + np.abs(x[..., 3]) + np.cos(x[..., 4])


def _g10(x):
    return (
        _g5(x)
        + np.sin(x[..., 5])
        + np.exp(x[..., 6])
        + np.log1p(x[..., 7])
        + x[..., 8] ** 0.5
        + x[..., 9] ** (1.0 / 3.0)
    )


def _g20(x):
    return (
        x[..., 0] ** 5
        + x[..., 1] ** 4
        + x[..., 2] ** 3
        + x[..., 3] ** 2
        + x[..., 4]
        + np.abs(x[..., 5])
        + x[..., 6] ** 0.5
        + x[..., 7] ** (1.0 / 3.0)
        + x[..., 8] ** 0.25
        + x[..., 9] ** 0.2
        + np.abs(x[..., 10] ** 3)
        + np.cos(x[..., 11])
        + np.sin(x[..., 12])
        + np.cos(x[..., 13] ** 2)
        + np.sin(x[..., 14] ** 2)
        + np.exp(x[..., 15])
        + np.log1p(x[..., 16])
        + np.exp(x[..., 17] ** 2)
        + np.log1p(x[..., 18] ** 2)
        + np.log1p(x[..., 19] ** 0.5)
    )


_TARGETS = {5: _g5, 10: _g10, 20: _g20}


def target_values(p, X):
    """Noiseless target g_p evaluated on every row of X [m x d]."""
    if p not in _TARGETS:
        raise ValueError("p must be 5, 10 or 20")
    X = np.asarray(X, dtype=np.float64)
    x = X @ beta_matrix(X.shape[1], p)
    return _TARGETS[p](x)


def target_g(p, Xrow):
    """Noiseless target g_p for one covariate row."""
    return float(target_values(p, np.asarray(Xrow, dtype=np.float64)[None, :])[0])


def sample_errors(kind, rng, X, scale_is_variance=True):
    """One error draw per row of X under the given error distribution."""
    n = X.shape[0]
    if kind is ErrorKind.NORMAL_STD:
        return rng.standard_normal(n)
    if kind is ErrorKind.MIXTURE_GAUSS:
        pick_wide = rng.uniform01(n) < 0.3
        z = rng.standard_normal(n)
        wide_sd = math.sqrt(5.0) if scale_is_variance else 5.0
        return np.where(pick_wide, wide_sd * z, z)
    if kind is ErrorKind.STUDENT_T2:
        return rng.student_t2(n)
    if kind is ErrorKind.HETERO:
        if X.shape[1] < 2:
            raise ValueError("heteroscedastic errors need at least 2 covariates")
        scale = 3.0 * X[:, 0] + 4.0 * X[:, 1]
        sd = np.sqrt(scale) if scale_is_variance else scale
        return sd * rng.standard_normal(n)
    raise TypeError(f"unknown error kind {kind!r}")


def sample_error(kind, rng, Xrow, scale_is_variance=True):
    """Single error draw for one covariate row."""
    return float(sample_errors(kind, rng, np.asarray(Xrow)[None, :], scale_is_variance))


# Stream allocation under the master seed: stream 0 is the fixed grid,
# stream r+1 drives replication r.
_GRID_STREAM = 0


def generate_scenario(cfg, replication):
    """Training data for one replication plus the fixed evaluation grid.

    The grid is drawn once from the master seed and is bitwise-identical
    across replications; it carries noiseless targets. Training X and
    errors come from a replication-specific child stream.
    """
    if replication < 0:
        raise ValueError("replication must be >= 0")
    grid_rng = RngState(cfg.master_seed, _GRID_STREAM)
    grid_X = grid_rng.uniform01(cfg.n_grid * cfg.d).reshape(cfg.n_grid, cfg.d)
    grid_g = target_values(cfg.p, grid_X)
    grid = Dataset(X=grid_X, Y=grid_g.copy(), g_true=grid_g)

    rep_rng = RngState(cfg.master_seed, replication + 1)
    X = rep_rng.uniform01(cfg.n * cfg.d).reshape(cfg.n, cfg.d)
    g = target_values(cfg.p, X)
    eps = sample_errors(cfg.error, rep_rng, X, cfg.scale_is_variance)
    train = Dataset(X=X, Y=g + eps, g_true=g)
    return train, grid


def compute_bias_sd_rmse(predictions, g_true, labels=None):
    """Grid-based bias/SD/RMSE over replications.

    predictions is [R x n_grid]; bias is the root mean squared deviation
    of the per-point replication mean from the truth, SD the root mean of
    per-point variances across replications, and rmse^2 = bias^2 + sd^2.
    """
    P = np.asarray(predictions, dtype=np.float64)
    g = np.asarray(g_true, dtype=np.float64)
    if P.ndim != 2 or P.shape[0] < 2:
        raise ValueError("need at least 2 replications of predictions")
    if P.shape[1] != g.shape[0]:
        raise ValueError("grid size mismatch between predictions and g_true")
    mean_pred = P.mean(axis=0)
    bias = float(np.sqrt(np.mean((mean_pred - g) ** 2)))
    sd = float(np.sqrt(np.mean(np.mean((P - mean_pred) ** 2, axis=0))))
    rmse = float(np.sqrt(bias**2 + sd**2))
    return MetricsReport(bias=bias, sd=sd, rmse=rmse, labels=labels or {})


def prediction_error(model, test):
    """Mean squared prediction error on a held-out dataset (eval mode)."""
    if test.n == 0:
        raise ValueError("test data is empty")
    preds, _ = forward(model, test.X)
    return float(np.mean((preds - test.Y) ** 2))


def residual_qq_data(residuals):
    """Normal Q-Q pairs: theoretical quantiles vs standardized residuals.

    Theoretical quantiles are standard-normal at plotting positions
    (i - 0.5)/n. Residuals are standardized to match the first two
    moments of the theoretical quantile set, so an input that is an
    affine image of those quantiles lands exactly on the identity line.
    """
    r = np.asarray(residuals, dtype=np.float64)
    n = r.size
    if n < 2:
        raise ValueError("need at least 2 residuals")
    sd = float(np.std(r))
    if sd == 0.0:
        raise ValueError("degenerate input: residuals have zero variance")
    theo = ndtri((np.arange(1, n + 1) - 0.5) / n)
    emp = np.sort(r)
    emp = (emp - emp.mean()) / np.std(emp) * np.std(theo) + theo.mean()
    return np.column_stack([theo, emp])
