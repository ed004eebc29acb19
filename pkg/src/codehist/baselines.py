"""Feature-space baselines: Gaussian Frechet distance and kernel MMD^2.

Both operate on real-valued feature vectors (one per image), independent of
any tokenizer, and serve as the continuous-space reference points for the
token-space scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .token_io import FeatureSet


@dataclass(frozen=True)
class GaussianFit:
    """Mean vector and symmetrized covariance of a feature set."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or cov.shape != (mean.shape[0], mean.shape[0]):
            raise ValueError("mean must be (d,) and cov (d, d)")
        if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
            raise ValueError("Gaussian fit must be finite")
        if np.abs(cov - cov.T).max(initial=0.0) > 1e-12:
            raise ValueError("covariance must be symmetric")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def _as_matrix(features) -> np.ndarray:
    vec = features.vectors if isinstance(features, FeatureSet) else np.asarray(features, dtype=np.float64)
    if vec.ndim != 2:
        raise ValueError("features must be a 2-D (count, dim) array")
    return vec


def fit_gaussian(features) -> GaussianFit:
    """Sample mean and (n - 1)-normalized covariance, symmetrized."""
    vec = _as_matrix(features)
    if vec.shape[0] < 2:
        raise ValueError(f"covariance fitting needs >= 2 vectors, got {vec.shape[0]}")
    mean = vec.mean(axis=0)
    centered = vec - mean
    with np.errstate(over="ignore"):
        cov = centered.T @ centered / (vec.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    if not (np.isfinite(mean).all() and np.isfinite(cov).all()):
        raise NumericError("covariance overflowed to non-finite values")
    return GaussianFit(mean, cov)


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition, negatives clamped."""
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.T


def frechet_distance(a: GaussianFit, b: GaussianFit) -> float:
    """Frechet distance between two Gaussians.

    ||mu_a - mu_b||^2 + Tr(C_a + C_b - 2 (C_a C_b)^{1/2}), with the trace of
    the matrix square root computed from the symmetric form: eigendecompose
    S C_b S for S = C_a^{1/2}, clamp negative eigenvalues to zero, and sum
    the square roots.
    """
    if a.dim != b.dim:
        raise ValueError(f"fit dimensions differ: {a.dim} vs {b.dim}")
    s = _psd_sqrt(a.cov)
    inner = s @ b.cov @ s
    inner = (inner + inner.T) / 2.0
    vals = np.clip(np.linalg.eigh(inner)[0], 0.0, None)
    tr_sqrt = float(np.sqrt(vals).sum())
    diff = a.mean - b.mean
    result = float(diff @ diff) + float(np.trace(a.cov) + np.trace(b.cov)) - 2.0 * tr_sqrt
    if not math.isfinite(result):
        raise NumericError("Frechet distance is not finite")
    return result


def median_pairwise_distance(pooled: np.ndarray) -> float:
    """Median Euclidean distance over all distinct pairs of pooled rows."""
    n = pooled.shape[0]
    if n < 2:
        raise ValueError("median heuristic needs at least 2 pooled vectors")
    sq = _sq_dists(pooled, pooled)
    iu = np.triu_indices(n, k=1)
    return float(np.median(np.sqrt(sq[iu])))


def _sq_dists(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    xx = (x * x).sum(axis=1)[:, None]
    yy = (y * y).sum(axis=1)[None, :]
    sq = xx + yy - 2.0 * (x @ y.T)
    return np.clip(sq, 0.0, None)


def mmd2(x, y, bandwidth: float | None = None) -> float:
    """Biased (V-statistic) squared MMD with a Gaussian RBF kernel.

    The kernel is exp(-||a - b||^2 / (2 gamma^2)); gamma defaults to the
    median pairwise distance over the pooled sets, which requires each set
    to hold at least 2 vectors. Passing ``bandwidth`` explicitly waives the
    size minimum. A zero median (identical pooled points) returns 0.
    """
    xv, yv = _as_matrix(x), _as_matrix(y)
    if xv.shape[1] != yv.shape[1]:
        raise ValueError(f"feature dimensions differ: {xv.shape[1]} vs {yv.shape[1]}")
    if xv.shape[0] < 1 or yv.shape[0] < 1:
        raise ValueError("both sets must be non-empty")
    if bandwidth is None:
        if xv.shape[0] < 2 or yv.shape[0] < 2:
            raise ValueError("median-heuristic MMD needs >= 2 vectors per set")
        gamma = median_pairwise_distance(np.concatenate([xv, yv], axis=0))
        if gamma == 0.0:
            return 0.0
    else:
        if bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        gamma = float(bandwidth)
    denom = 2.0 * gamma * gamma
    kxx = np.exp(-_sq_dists(xv, xv) / denom).mean()
    kyy = np.exp(-_sq_dists(yv, yv) / denom).mean()
    kxy = np.exp(-_sq_dists(xv, yv) / denom).mean()
    return max(0.0, float(kxx + kyy - 2.0 * kxy))
