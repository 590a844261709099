"""Synthetic minority oversampling (convex interpolation between a
minority sample and one of its k nearest minority neighbors).

Original rows are always preserved verbatim and come first in the output;
synthetic rows are appended, so callers can track provenance with the
returned mask. Resampling is byte-deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError


@dataclass(frozen=True)
class SmoteConfig:
    k_neighbors: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k_neighbors < 1:
            raise ConfigError(f"k_neighbors must be >= 1, got {self.k_neighbors}")


def smote_resample(
    X: np.ndarray, y: np.ndarray, config: SmoteConfig = SmoteConfig()
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Equalize binary class counts by synthesizing minority rows.

    Returns (X_out, y_out, synthetic_mask) where the first len(X) rows of
    X_out are the original rows unchanged and synthetic_mask flags the
    appended rows. Already-balanced input is returned unchanged.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or len(y) != X.shape[0]:
        raise DataError("X must be 2-D with one label per row")
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise DataError(f"SMOTE requires binary labels, got {len(classes)} classes")

    n_orig = X.shape[0]
    if counts[0] == counts[1]:
        return X, y, np.zeros(n_orig, dtype=bool)

    minority = classes[np.argmin(counts)]
    minority_idx = np.flatnonzero(y == minority)
    m = minority_idx.size
    deficit = int(counts.max() - m)
    if config.k_neighbors >= m:
        raise ConfigError(
            f"k_neighbors={config.k_neighbors} must be smaller than the "
            f"minority class size {m}"
        )

    Xm = X[minority_idx]
    neighbors = _knn_indices(Xm, config.k_neighbors)

    rng = np.random.default_rng(config.seed)
    base = rng.integers(0, m, size=deficit)
    pick = rng.integers(0, config.k_neighbors, size=deficit)
    lam = rng.random(deficit)

    a = Xm[base]
    b = Xm[neighbors[base, pick]]
    synthetic = a + lam[:, None] * (b - a)

    X_out = np.vstack([X, synthetic])
    y_out = np.concatenate([y, np.full(deficit, minority, dtype=y.dtype)])
    mask = np.concatenate([np.zeros(n_orig, dtype=bool), np.ones(deficit, dtype=bool)])
    return X_out, y_out, mask


def _knn_indices(X: np.ndarray, k: int) -> np.ndarray:
    """k nearest neighbors by Euclidean distance, excluding self.

    Ties are broken by lower row index (lexicographic sort on
    (distance, index)), keeping the result deterministic.
    """
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.clip(d2, 0.0, None, out=d2)
    np.fill_diagonal(d2, np.inf)
    n = X.shape[0]
    idx = np.arange(n)
    out = np.empty((n, k), dtype=np.intp)
    for i in range(n):
        order = np.lexsort((idx, d2[i]))
        out[i] = order[:k]
    return out
