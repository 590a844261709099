"""Principal component analysis with a cumulative explained-variance target.

Covariance uses the n-1 denominator. When the feature dimension exceeds
the sample count (image features: d >> n) the Gram-matrix route computes
the same nonzero spectrum without forming the d x d covariance.
Component signs are fixed so the largest-magnitude coordinate of each
component is positive, making projections reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericError

# Relative eigenvalue floor below which directions count as numerical noise.
_RANK_TOL = 1e-12


@dataclass(frozen=True)
class PcaModel:
    mean_vector: np.ndarray        # (d,)
    components: np.ndarray         # (k, d), rows orthonormal
    explained_variance: np.ndarray  # (k,), descending eigenvalues
    total_variance: float
    retained_ratio: float
    scale_vector: np.ndarray | None = None  # set when fitted with standardize

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    def to_params(self) -> dict:
        return {
            "mean_vector": self.mean_vector,
            "components": self.components,
            "explained_variance": self.explained_variance,
            "total_variance": self.total_variance,
            "retained_ratio": self.retained_ratio,
            "scale_vector": self.scale_vector,
        }

    @classmethod
    def from_params(cls, params: dict) -> "PcaModel":
        return cls(**params)


def fit_pca(
    X: np.ndarray,
    variance_target: float = 0.99,
    standardize: bool = False,
) -> PcaModel:
    """Fit PCA keeping the smallest component count whose cumulative
    explained variance reaches `variance_target`.

    `standardize` divides columns by their standard deviation before the
    eigendecomposition (mean-centering only is the default).
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError(f"PCA needs a 2-D matrix with >= 2 rows, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise DataError("PCA input contains non-finite values")
    if not (0 < variance_target <= 1):
        raise DataError(f"variance_target must be in (0, 1], got {variance_target}")

    n, d = X.shape
    mean = X.mean(axis=0)
    Xc = X - mean
    scale = None
    if standardize:
        scale = Xc.std(axis=0, ddof=1)
        scale[scale == 0] = 1.0
        Xc = Xc / scale

    total = float(np.sum(Xc * Xc) / (n - 1))
    if total <= 0:
        raise NumericError("zero total variance: all rows identical")

    if d <= n:
        cov = Xc.T @ Xc / (n - 1)
        evals, evecs = np.linalg.eigh(cov)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        comps = evecs[:, order].T
    else:
        gram = Xc @ Xc.T / (n - 1)
        evals, u = np.linalg.eigh(gram)
        order = np.argsort(evals)[::-1]
        evals = evals[order]
        u = u[:, order]
        nonzero = evals > _RANK_TOL * total
        evals = evals[nonzero]
        # v_j = Xc^T u_j / ||Xc^T u_j||, with ||Xc^T u_j|| = sqrt(lambda_j (n-1))
        comps = (Xc.T @ u[:, nonzero]).T / np.sqrt(evals * (n - 1))[:, None]

    evals = np.clip(evals, 0.0, None)
    keep = evals > _RANK_TOL * total
    evals = evals[keep]
    comps = comps[keep]

    cum = np.cumsum(evals) / total
    k = int(np.searchsorted(cum, variance_target - 1e-12) + 1)
    k = min(k, len(evals))
    evals = evals[:k]
    comps = np.ascontiguousarray(comps[:k])

    # Sign convention: largest-magnitude coordinate positive.
    flip = comps[np.arange(k), np.argmax(np.abs(comps), axis=1)] < 0
    comps[flip] *= -1.0

    return PcaModel(
        mean_vector=mean,
        components=comps,
        explained_variance=evals,
        total_variance=total,
        retained_ratio=float(cum[k - 1]),
        scale_vector=scale,
    )


def project(model: PcaModel, X: np.ndarray) -> np.ndarray:
    """Project rows of X onto the fitted components."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.mean_vector.shape[0]:
        raise DataError(
            f"cannot project shape {X.shape}: model expects "
            f"{model.mean_vector.shape[0]} columns"
        )
    Xc = X - model.mean_vector
    if model.scale_vector is not None:
        Xc = Xc / model.scale_vector
    return Xc @ model.components.T


def reconstruct(model: PcaModel, Z: np.ndarray) -> np.ndarray:
    """Map projected coordinates back to the original feature space."""
    X = np.asarray(Z, dtype=np.float64) @ model.components
    if model.scale_vector is not None:
        X = X * model.scale_vector
    return X + model.mean_vector
