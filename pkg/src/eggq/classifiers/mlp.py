"""Feedforward neural network for binary classification.

Fixed budget of 200 epochs, batch size 32, early stopping on a 10%
holdout of the training data with patience 20 (best weights restored).
Solvers: plain SGD or Adam. L2 penalty `alpha` applies to weights only.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import ClassifierModel, ClassifierSpec, check_training_data

_EPOCHS = 200
_BATCH = 32
_PATIENCE = 20
_VAL_FRACTION = 0.1


def _act(z: np.ndarray, kind: str) -> np.ndarray:
    return np.maximum(z, 0.0) if kind == "relu" else np.tanh(z)


def _act_grad(a: np.ndarray, kind: str) -> np.ndarray:
    return (a > 0).astype(np.float64) if kind == "relu" else 1.0 - a * a


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def init_layers(sizes: tuple[int, ...], rng: np.random.Generator):
    """Glorot-uniform weights and zero biases for consecutive layer sizes."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def forward(X: np.ndarray, weights, biases, activation: str):
    """Activations per layer; the last entry is the positive-class probability."""
    acts = [X]
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = acts[-1] @ W + b
        acts.append(_sigmoid(z[:, 0])[:, None] if i == len(weights) - 1 else _act(z, activation))
    return acts


def loss_and_grads(
    weights, biases, X: np.ndarray, y01: np.ndarray, activation: str, alpha: float
):
    """Mean binary cross-entropy + (alpha/(2n))*sum||W||^2 and its gradients.

    Pure function of the parameters; the analytic gradients here are what
    the finite-difference check exercises.
    """
    n = X.shape[0]
    acts = forward(X, weights, biases, activation)
    p = acts[-1][:, 0]
    eps = 1e-12
    loss = float(-np.mean(y01 * np.log(p + eps) + (1 - y01) * np.log(1 - p + eps)))
    loss += 0.5 * alpha / n * sum(float(np.sum(W * W)) for W in weights)

    gw = [None] * len(weights)
    gb = [None] * len(biases)
    delta = ((p - y01) / n)[:, None]  # dL/dz for the sigmoid output layer
    for i in range(len(weights) - 1, -1, -1):
        gw[i] = acts[i].T @ delta + (alpha / n) * weights[i]
        gb[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * _act_grad(acts[i], activation)
    return loss, gw, gb


class MlpModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, weights, biases, activation):
        super().__init__(spec, classes, n_features)
        self.weights = weights
        self.biases = biases
        self.activation = activation

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        return forward(X, self.weights, self.biases, self.activation)[-1][:, 0]

    def to_params(self) -> dict:
        return {
            "kind": "MlpModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "activation": self.activation,
            "weights": list(self.weights),
            "biases": list(self.biases),
        }

    @classmethod
    def from_params(cls, params: dict) -> "MlpModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            [np.asarray(w) for w in params["weights"]],
            [np.asarray(b) for b in params["biases"]],
            str(params["activation"]),
        )


def train_mlp(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> MlpModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    hidden = tuple(hp.get("hidden_layer_sizes", (16,)))
    activation = hp.get("activation", "relu")
    if activation not in ("relu", "tanh"):
        raise ConfigError(f"unknown activation {activation!r}")
    lr = float(hp.get("learning_rate_init", 0.001))
    alpha = float(hp.get("alpha", 0.0001))
    solver = hp.get("solver", "adam")
    if solver not in ("sgd", "adam"):
        raise ConfigError(f"unknown solver {solver!r}")

    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFF)
    n = X.shape[0]

    # Inputs are standardized internally; image-activation scales vary wildly.
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0] = 1.0
    Xs = (X - mu) / sd

    n_val = max(1, int(round(_VAL_FRACTION * n)))
    perm = rng.permutation(n)
    val_idx, tr_idx = perm[:n_val], perm[n_val:]
    if len(np.unique(y01[tr_idx])) < 2:  # tiny datasets: train on everything
        tr_idx = perm
        val_idx = perm
    Xtr, ytr = Xs[tr_idx], y01[tr_idx]
    Xval, yval = Xs[val_idx], y01[val_idx]

    sizes = (X.shape[1],) + hidden + (1,)
    weights, biases = init_layers(sizes, rng)
    mw = [np.zeros_like(w) for w in weights]
    vw = [np.zeros_like(w) for w in weights]
    mb = [np.zeros_like(b) for b in biases]
    vb = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    t = 0

    best_val = np.inf
    best = ([w.copy() for w in weights], [b.copy() for b in biases])
    stale = 0
    ntr = Xtr.shape[0]
    for _ in range(_EPOCHS):
        order = rng.permutation(ntr)
        for start in range(0, ntr, _BATCH):
            batch = order[start:start + _BATCH]
            _, gw, gb = loss_and_grads(weights, biases, Xtr[batch], ytr[batch], activation, alpha)
            t += 1
            for i in range(len(weights)):
                if solver == "adam":
                    for g, w_, m_, v_ in ((gw[i], weights[i], mw[i], vw[i]),
                                          (gb[i], biases[i], mb[i], vb[i])):
                        m_ *= beta1
                        m_ += (1 - beta1) * g
                        v_ *= beta2
                        v_ += (1 - beta2) * g * g
                        mhat = m_ / (1 - beta1**t)
                        vhat = v_ / (1 - beta2**t)
                        w_ -= lr * mhat / (np.sqrt(vhat) + eps)
                else:
                    weights[i] -= lr * gw[i]
                    biases[i] -= lr * gb[i]
        val_loss, _, _ = loss_and_grads(weights, biases, Xval, yval, activation, alpha)
        if val_loss < best_val - 1e-6:
            best_val = val_loss
            best = ([w.copy() for w in weights], [b.copy() for b in biases])
            stale = 0
        else:
            stale += 1
            if stale >= _PATIENCE:
                break
    weights, biases = best

    # Fold the standardization into the first layer so predict takes raw inputs.
    W0 = weights[0] / sd[:, None]
    b0 = biases[0] - mu @ W0
    return MlpModel(
        spec, classes, X.shape[1], [W0] + weights[1:], [b0] + biases[1:], activation
    )
