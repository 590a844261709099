"""Kernel support vector classifier trained by SMO on the dual, with
sigmoid (Platt) calibration of decision scores into probabilities.

Working-set selection is the maximal-violating-pair rule, which is
deterministic; the stopping tolerance is 1e-3 on the duality-gap
surrogate. gamma follows the usual conventions: "scale" = 1/(d*Var(X)),
"auto" = 1/d.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import ClassifierModel, ClassifierSpec, check_training_data, class_weights

_TAU = 1e-12
_EPS = 1e-3

KERNELS = ("linear", "poly", "rbf", "sigmoid")


def _kernel(Xa: np.ndarray, Xb: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
    if kernel == "linear":
        return Xa @ Xb.T
    if kernel == "poly":
        return (gamma * (Xa @ Xb.T)) ** 3
    if kernel == "sigmoid":
        return np.tanh(gamma * (Xa @ Xb.T))
    if kernel == "rbf":
        sq_a = np.sum(Xa * Xa, axis=1)[:, None]
        sq_b = np.sum(Xb * Xb, axis=1)[None, :]
        d2 = np.maximum(sq_a + sq_b - 2.0 * (Xa @ Xb.T), 0.0)
        return np.exp(-gamma * d2)
    raise ConfigError(f"unknown kernel {kernel!r}")


def _resolve_gamma(gamma, X: np.ndarray) -> float:
    if gamma == "scale":
        var = X.var()
        return 1.0 / (X.shape[1] * var) if var > 0 else 1.0 / X.shape[1]
    if gamma == "auto":
        return 1.0 / X.shape[1]
    g = float(gamma)
    if g <= 0:
        raise ConfigError(f"gamma must be positive, got {g}")
    return g


def _smo(K: np.ndarray, ysign: np.ndarray, C_per: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve min 0.5 a'Qa - e'a, 0 <= a <= C, y'a = 0; returns (alpha, rho)."""
    n = K.shape[0]
    Q = (ysign[:, None] * ysign[None, :]) * K
    alpha = np.zeros(n)
    grad = -np.ones(n)
    max_iter = max(100000, 100 * n)

    for _ in range(max_iter):
        yG = ysign * grad
        up = ((alpha < C_per - 1e-12) & (ysign > 0)) | ((alpha > 1e-12) & (ysign < 0))
        low = ((alpha < C_per - 1e-12) & (ysign < 0)) | ((alpha > 1e-12) & (ysign > 0))
        if not up.any() or not low.any():
            break
        neg_yG = -yG
        i = int(np.flatnonzero(up)[np.argmax(neg_yG[up])])
        j = int(np.flatnonzero(low)[np.argmin(neg_yG[low])])
        if neg_yG[i] - neg_yG[j] < _EPS:
            break

        old_i, old_j = alpha[i], alpha[j]
        Ci, Cj = C_per[i], C_per[j]
        if ysign[i] != ysign[j]:
            quad = Q[i, i] + Q[j, j] + 2.0 * Q[i, j]
            delta = (-grad[i] - grad[j]) / max(quad, _TAU)
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
            if diff > Ci - Cj:
                if alpha[i] > Ci:
                    alpha[i] = Ci
                    alpha[j] = Ci - diff
            else:
                if alpha[j] > Cj:
                    alpha[j] = Cj
                    alpha[i] = Cj + diff
        else:
            quad = Q[i, i] + Q[j, j] - 2.0 * Q[i, j]
            delta = (grad[i] - grad[j]) / max(quad, _TAU)
            ssum = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if ssum > Ci:
                if alpha[i] > Ci:
                    alpha[i] = Ci
                    alpha[j] = ssum - Ci
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = ssum
            if ssum > Cj:
                if alpha[j] > Cj:
                    alpha[j] = Cj
                    alpha[i] = ssum - Cj
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = ssum
        grad += Q[:, i] * (alpha[i] - old_i) + Q[:, j] * (alpha[j] - old_j)

    yG = ysign * grad
    free = (alpha > 1e-12) & (alpha < C_per - 1e-12)
    if free.any():
        rho = float(yG[free].mean())
    else:
        ub, lb = np.inf, -np.inf
        for t in range(n):
            at_upper = alpha[t] >= C_per[t] - 1e-12
            at_lower = alpha[t] <= 1e-12
            if (at_upper and ysign[t] < 0) or (at_lower and ysign[t] > 0):
                ub = min(ub, yG[t])
            elif (at_upper and ysign[t] > 0) or (at_lower and ysign[t] < 0):
                lb = max(lb, yG[t])
        rho = float((ub + lb) / 2.0) if np.isfinite(ub) and np.isfinite(lb) else 0.0
    return alpha, rho


def _fit_platt(scores: np.ndarray, y01: np.ndarray) -> tuple[float, float]:
    """Newton fit of p = 1/(1+exp(A*s+B)) on training decision scores."""
    prior1 = float(y01.sum())
    prior0 = float(len(y01) - prior1)
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(y01 == 1, hi, lo)
    A, B = 0.0, np.log((prior0 + 1.0) / (prior1 + 1.0))
    sigma = 1e-12
    for _ in range(100):
        z = A * scores + B
        p = np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))
        d1 = t - p  # d/dz of [log(1+e^z) - (1-t) z]
        d2 = p * (1.0 - p)
        g1 = float(scores @ d1)
        g2 = float(d1.sum())
        if abs(g1) < 1e-5 and abs(g2) < 1e-5:
            break
        h11 = float(scores @ (scores * d2)) + sigma
        h22 = float(d2.sum()) + sigma
        h21 = float(scores @ d2)
        det = h11 * h22 - h21 * h21
        dA = -(h22 * g1 - h21 * g2) / det
        dB = -(-h21 * g1 + h11 * g2) / det
        # Backtracking line search on the cross-entropy objective.
        def fval(a, b):
            zz = a * scores + b
            return float(np.sum(np.logaddexp(0.0, zz) - (1.0 - t) * zz))
        base = fval(A, B)
        step = 1.0
        while step >= 1e-10:
            if fval(A + step * dA, B + step * dB) < base + 1e-4 * step * (g1 * dA + g2 * dB):
                A += step * dA
                B += step * dB
                break
            step *= 0.5
        else:
            break
    return A, B


class SvcModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, support_vectors, dual_coef,
                 rho, kernel, gamma, platt_a, platt_b):
        super().__init__(spec, classes, n_features)
        self.support_vectors = support_vectors
        self.dual_coef = dual_coef  # alpha_i * y_i for support vectors
        self.rho = rho
        self.kernel = kernel
        self.gamma = gamma
        self.platt_a = platt_a
        self.platt_b = platt_b

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        K = _kernel(self._check(X), self.support_vectors, self.kernel, self.gamma)
        return K @ self.dual_coef - self.rho

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        z = self.platt_a * self.decision_function(X) + self.platt_b
        return np.where(z >= 0, np.exp(-z) / (1.0 + np.exp(-z)), 1.0 / (1.0 + np.exp(z)))

    def to_params(self) -> dict:
        return {
            "kind": "SvcModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "support_vectors": self.support_vectors,
            "dual_coef": self.dual_coef,
            "rho": self.rho,
            "kernel": self.kernel,
            "gamma": self.gamma,
            "platt_a": self.platt_a,
            "platt_b": self.platt_b,
        }

    @classmethod
    def from_params(cls, params: dict) -> "SvcModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            np.asarray(params["support_vectors"]),
            np.asarray(params["dual_coef"]),
            float(params["rho"]),
            str(params["kernel"]),
            float(params["gamma"]),
            float(params["platt_a"]),
            float(params["platt_b"]),
        )


def train_svc(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> SvcModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    C = float(hp.get("C", 1.0))
    if C <= 0:
        raise ConfigError(f"C must be > 0, got {C}")
    kernel = hp.get("kernel", "rbf")
    if kernel not in KERNELS:
        raise ConfigError(f"unknown kernel {kernel!r}; allowed {list(KERNELS)}")
    gamma = _resolve_gamma(hp.get("gamma", "scale"), X)
    ysign = 2.0 * y01 - 1.0
    C_per = C * class_weights(y01, hp.get("class_weight"))

    K = _kernel(X, X, kernel, gamma)
    alpha, rho = _smo(K, ysign, C_per)

    scores = K @ (alpha * ysign) - rho
    platt_a, platt_b = _fit_platt(scores, y01)

    sv = alpha > 1e-12
    if not sv.any():
        sv = np.zeros_like(sv)
        sv[0] = True  # degenerate solution; keep one vector so predict works
    return SvcModel(
        spec, classes, X.shape[1],
        support_vectors=X[sv].copy(),
        dual_coef=(alpha * ysign)[sv],
        rho=rho,
        kernel=kernel,
        gamma=gamma,
        platt_a=platt_a,
        platt_b=platt_b,
    )
