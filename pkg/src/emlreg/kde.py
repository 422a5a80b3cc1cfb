"""Gaussian kernel, bandwidth rules, and residual density estimation.

The density estimate at a residual e_i is
    f(e_i) = (1/n) * sum_j K((e_j - e_i) / h_i) / h_i,
including the j = i self-term. Bandwidths are either a single fixed h or
a per-point varying bandwidth equal to the range of the k-nearest-neighbor
set of each residual, with k = ceil(n * v).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

__all__ = [
    "Fixed",
    "KnnProportion",
    "gaussian_kernel",
    "kernel_moment",
    "default_floor",
    "knn_bandwidths",
    "resolve_bandwidths",
    "kde_at",
    "kde_values",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


@dataclass(frozen=True)
class Fixed:
    """A single bandwidth shared by every evaluation point."""

    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("fixed bandwidth must be positive")


@dataclass(frozen=True)
class KnnProportion:
    """Per-point bandwidth: range of the nearest ceil(n*v) residuals.

    floor=None selects the data-driven default: 1e-3 times the full
    residual range, with absolute fallback 1e-6 on zero range.
    """

    v: float
    floor: float = None

    def __post_init__(self):
        if not 0.0 < self.v <= 1.0:
            raise ValueError("proportion v must lie in (0, 1]")
        if self.floor is not None and not self.floor > 0:
            raise ValueError("bandwidth floor must be positive")


def gaussian_kernel(t):
    """Standard normal density exp(-t^2/2)/sqrt(2*pi); accepts arrays."""
    t = np.asarray(t, dtype=np.float64)
    return _INV_SQRT_2PI * np.exp(-0.5 * t * t)


def kernel_moment(r):
    """Numerical moment integral of the Gaussian kernel, K(t)*t^r over [-12, 12].

    Only r in {0, 1, 2} is supported; these are the moments constraining a
    valid second-order kernel (unit mass, zero mean, unit variance here).
    """
    if r not in (0, 1, 2):
        raise ValueError(f"unsupported moment order r={r}")
    val, _ = quad(lambda t: gaussian_kernel(t) * t**r, -12.0, 12.0, epsabs=1e-12)
    return val


def default_floor(residuals):
    """Default bandwidth floor: 1e-3 of the residual range, 1e-6 if degenerate."""
    residuals = np.asarray(residuals, dtype=np.float64)
    rng = float(np.max(residuals) - np.min(residuals))
    return 1e-3 * rng if rng > 0 else 1e-6


def knn_bandwidths(residuals, v, floor=None):
    """Varying bandwidth h(e_i) = max - min of the ceil(n*v) nearest residuals.

    The neighborhood of e_i contains e_i itself; ties in absolute distance
    are broken in favor of the smaller original index. Values below the
    floor are replaced by the floor.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    n = residuals.size
    if n < 2:
        raise ValueError("need at least 2 residuals")
    if not 0.0 < v <= 1.0:
        raise ValueError("proportion v must lie in (0, 1]")
    if floor is None:
        floor = default_floor(residuals)
    k = math.ceil(n * v)
    # Stable argsort on the distance matrix implements the smaller-index
    # tie-break exactly; O(n^2 log n) but exact.
    dist = np.abs(residuals[None, :] - residuals[:, None])
    order = np.argsort(dist, axis=1, kind="stable")[:, :k]
    neigh = residuals[order]
    h = neigh.max(axis=1) - neigh.min(axis=1)
    return np.maximum(h, floor)


def resolve_bandwidths(residuals, rule):
    """Materialize a bandwidth rule into a per-point bandwidth vector."""
    residuals = np.asarray(residuals, dtype=np.float64)
    if isinstance(rule, Fixed):
        return np.full(residuals.size, rule.h)
    if isinstance(rule, KnnProportion):
        return knn_bandwidths(residuals, rule.v, rule.floor)
    raise TypeError(f"unknown bandwidth rule {rule!r}")


def kde_values(residuals, bandwidths):
    """Density estimate at every residual, using its own bandwidth.

    Returns the vector f with f[i] = (1/n) sum_j K((e_j - e_i)/h_i) / h_i.
    """
    residuals = np.asarray(residuals, dtype=np.float64)
    h = np.asarray(bandwidths, dtype=np.float64)
    if np.any(h <= 0):
        raise ValueError("bandwidths must be positive")
    diff = (residuals[None, :] - residuals[:, None]) / h[:, None]
    return gaussian_kernel(diff).sum(axis=1) / (residuals.size * h)


def kde_at(residuals, query_index, bandwidths):
    """Density estimate at residuals[query_index] with its bandwidth."""
    residuals = np.asarray(residuals, dtype=np.float64)
    h = np.asarray(bandwidths, dtype=np.float64)
    hi = float(h[query_index])
    if hi <= 0:
        raise ValueError("bandwidth at query index must be positive")
    t = (residuals - residuals[query_index]) / hi
    return float(gaussian_kernel(t).sum() / (residuals.size * hi))
