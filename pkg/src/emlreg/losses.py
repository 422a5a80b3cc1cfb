"""The six training objectives and their gradients with respect to residuals.

Pointwise kinds (LS, LAD, Huber, Cauchy, Tukey) apply rho(e_i) per
residual. The estimated-maximum-likelihood (EML) objective is the negative
mean log of a kernel density estimate of the residuals evaluated at each
residual; it couples all residuals through the pairwise kernel matrix.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .kde import Fixed, KnnProportion, gaussian_kernel, kde_values, resolve_bandwidths

__all__ = [
    "LS",
    "LAD",
    "Huber",
    "Cauchy",
    "Tukey",
    "EML",
    "LossEval",
    "pointwise_loss",
    "pointwise_grad",
    "eml_loss_and_grad",
    "eml_value_fixed_bandwidths",
    "batch_loss_and_grad",
]


@dataclass(frozen=True)
class LS:
    pass


@dataclass(frozen=True)
class LAD:
    pass


@dataclass(frozen=True)
class Huber:
    zeta: float = 1.345


@dataclass(frozen=True)
class Cauchy:
    kappa: float = 1.0


@dataclass(frozen=True)
class Tukey:
    t: float = 4.685


@dataclass(frozen=True)
class EML:
    """Negative mean log kernel density of the residuals.

    The density inside the log is clamped from below to keep the
    objective finite; clamped terms contribute zero gradient.
    """

    bandwidth: object = field(default_factory=lambda: KnnProportion(0.3))
    clamp: float = 1e-5

    def __post_init__(self):
        if not self.clamp > 0:
            raise ValueError("clamp must be positive")


POINTWISE_KINDS = (LS, LAD, Huber, Cauchy, Tukey)


@dataclass
class LossEval:
    """Mean loss over the batch and its gradient per residual."""

    value: float
    grad_residuals: np.ndarray


def pointwise_loss(kind, x):
    """rho(x) for a pointwise loss kind; accepts scalars or arrays."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(kind, LS):
        return x * x
    if isinstance(kind, LAD):
        return np.abs(x)
    if isinstance(kind, Huber):
        z = kind.zeta
        a = np.abs(x)
        return np.where(a <= z, 0.5 * x * x, z * a - 0.5 * z * z)
    if isinstance(kind, Cauchy):
        return np.log1p(kind.kappa**2 * x * x)
    if isinstance(kind, Tukey):
        t = kind.t
        u = np.clip(1.0 - (x / t) ** 2, 0.0, None)
        return t * t * (1.0 - u**3) / 6.0
    if isinstance(kind, EML):
        raise ValueError("EML is not a pointwise loss")
    raise TypeError(f"unknown loss kind {kind!r}")


def pointwise_grad(kind, x):
    """d rho / dx, with subgradient 0 at the LAD kink."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(kind, LS):
        return 2.0 * x
    if isinstance(kind, LAD):
        return np.sign(x)
    if isinstance(kind, Huber):
        z = kind.zeta
        return np.clip(x, -z, z)
    if isinstance(kind, Cauchy):
        k2 = kind.kappa**2
        return 2.0 * k2 * x / (1.0 + k2 * x * x)
    if isinstance(kind, Tukey):
        t = kind.t
        u = 1.0 - (x / t) ** 2
        return np.where(np.abs(x) <= t, x * u * u, 0.0)
    if isinstance(kind, EML):
        raise ValueError("EML is not a pointwise loss")
    raise TypeError(f"unknown loss kind {kind!r}")


def eml_value_fixed_bandwidths(residuals, bandwidths, clamp):
    """EML value with an explicitly supplied bandwidth vector.

    This is the function the analytic gradient differentiates: bandwidths
    are held constant (stop-gradient), so finite differences of this map
    are the correct oracle for the gradient.
    """
    f = kde_values(residuals, bandwidths)
    return float(np.mean(-np.log(np.maximum(f, clamp))))


def eml_loss_and_grad(residuals, bandwidth, clamp=1e-5):
    """EML loss value and analytic residual gradient.

    The gradient accumulates both roles of each residual e_m: as the
    query point of its own density evaluation and as a kernel center in
    every other evaluation. Bandwidths are recomputed from the residuals
    but treated as constants under differentiation.
    """
    e = np.asarray(residuals, dtype=np.float64)
    n = e.size
    if n < 2:
        raise ValueError("EML needs at least 2 residuals")
    if not np.all(np.isfinite(e)):
        raise ValueError("residuals must be finite")
    h = resolve_bandwidths(e, bandwidth)

    diff = (e[None, :] - e[:, None]) / h[:, None]  # diff[i, j] = (e_j - e_i)/h_i
    K = gaussian_kernel(diff)
    f = K.sum(axis=1) / (n * h)
    value = float(np.mean(-np.log(np.maximum(f, clamp))))

    # dK/dt = -t*K for the Gaussian kernel; G[i, j] = d f_i / d e_j for j != i.
    G = -diff * K / (n * h * h)[:, None]
    np.fill_diagonal(G, 0.0)  # self-term derivative is 0 at t = 0
    # Query-role derivative d f_i / d e_i is minus the row sum of G.
    rowsum = G.sum(axis=1)
    c = np.where(f > clamp, -1.0 / np.maximum(f, clamp), 0.0)
    grad = (G.T @ c - c * rowsum) / n
    return LossEval(value=value, grad_residuals=grad)


def batch_loss_and_grad(residuals, kind):
    """Mean loss and per-residual gradient for any loss kind."""
    e = np.asarray(residuals, dtype=np.float64)
    if isinstance(kind, EML):
        return eml_loss_and_grad(e, kind.bandwidth, kind.clamp)
    if e.size < 1:
        raise ValueError("need at least 1 residual")
    n = e.size
    value = float(np.mean(pointwise_loss(kind, e)))
    grad = pointwise_grad(kind, e) / n
    return LossEval(value=value, grad_residuals=grad)
