"""Binary logistic regression trained by (proximal) gradient descent.

l2 penalties use accelerated gradient steps; l1 uses the same scheme with
a soft-threshold proximal step. The intercept is never penalized.
Convergence: gradient-map norm <= 1e-6 or 5000 iterations.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import ClassifierModel, ClassifierSpec, check_training_data, class_weights

_TOL = 1e-6
_MAX_ITER = 5000


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def loss_and_grad(
    params: np.ndarray,
    X: np.ndarray,
    y01: np.ndarray,
    sample_weight: np.ndarray,
    l2: float = 0.0,
) -> tuple[float, np.ndarray]:
    """Weighted log loss plus 0.5*l2*||w||^2 (intercept unpenalized).

    `params` is the flat vector [w, b]. Exposed at module level so the
    analytic gradient can be checked against finite differences.
    """
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + exp(-m)) with m = (2y-1) * z, numerically stable
    m = np.where(y01 == 1, z, -z)
    losses = np.logaddexp(0.0, -m)
    loss = float(sample_weight @ losses) + 0.5 * l2 * float(w @ w)
    r = sample_weight * (_sigmoid(z) - y01)
    grad = np.concatenate([X.T @ r + l2 * w, [r.sum()]])
    return loss, grad


def _lipschitz(X: np.ndarray, sample_weight: np.ndarray, l2: float) -> float:
    Xa = np.hstack([X, np.ones((X.shape[0], 1))]) * np.sqrt(sample_weight)[:, None]
    smax = np.linalg.norm(Xa, 2)
    return 0.25 * smax * smax + l2


class LogisticModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, weights: np.ndarray, intercept: float):
        super().__init__(spec, classes, n_features)
        self.weights = weights
        self.intercept = intercept

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(X @ self.weights + self.intercept)

    def to_params(self) -> dict:
        return {
            "kind": "LogisticModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "weights": self.weights,
            "intercept": self.intercept,
        }

    @classmethod
    def from_params(cls, params: dict) -> "LogisticModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            np.asarray(params["weights"]),
            float(params["intercept"]),
        )


def train_logistic(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> LogisticModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    C = float(hp.get("C", 1.0))
    penalty = hp.get("penalty", "l2")
    if penalty not in ("l1", "l2"):
        raise ConfigError(f"unknown penalty {penalty!r}")
    if C <= 0:
        raise ConfigError(f"C must be > 0, got {C}")
    sw = class_weights(y01, hp.get("class_weight"))

    l2 = 1.0 / C if penalty == "l2" else 0.0
    l1 = 1.0 / C if penalty == "l1" else 0.0
    L = _lipschitz(X, sw, l2)
    step = 1.0 / L

    params = np.zeros(X.shape[1] + 1)
    momentum = params.copy()
    t_acc = 1.0
    for _ in range(_MAX_ITER):
        loss, grad = loss_and_grad(momentum, X, y01, sw, l2)
        new = momentum - step * grad
        if l1 > 0.0:
            thresh = step * l1
            w = new[:-1]
            new[:-1] = np.sign(w) * np.maximum(np.abs(w) - thresh, 0.0)
        # Gradient map accounts for the proximal step under l1.
        gmap = (params - new) / step if l1 > 0.0 else grad
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_acc * t_acc))
        momentum = new + ((t_acc - 1.0) / t_next) * (new - params)
        params, t_acc = new, t_next
        if np.linalg.norm(gmap) <= _TOL:
            break

    return LogisticModel(spec, classes, X.shape[1], params[:-1].copy(), float(params[-1]))
