"""One gradient-boosted-tree engine behind three family labels.

All three fit second-order regression trees on the logistic loss.
GradientBoosting = full-batch depth-wise growth, no regularization knobs.
XGBoostStyle adds L2 leaf regularization (reg_lambda), min_child_weight
on the hessian sum, and row/column subsampling. LightGBMStyle grows
leaf-wise under a num_leaves budget with row subsampling.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ._tree import Tree, grow_gradient_tree
from .base import ClassifierModel, ClassifierSpec, check_training_data

_LEAF_CLIP = 5.0


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))), np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))


def _log_loss(y01: np.ndarray, raw: np.ndarray) -> float:
    m = np.where(y01 == 1, raw, -raw)
    return float(np.mean(np.logaddexp(0.0, -m)))


class BoostedTreesModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, prior: float,
                 learning_rate: float, trees: list[Tree], train_losses: np.ndarray):
        super().__init__(spec, classes, n_features)
        self.prior = prior
        self.learning_rate = learning_rate
        self.trees = trees
        # Full-training-set loss after each boosting round (diagnostics).
        self.train_losses = train_losses

    def raw_scores(self, X: np.ndarray) -> np.ndarray:
        raw = np.full(X.shape[0], self.prior)
        for tree in self.trees:
            raw += self.learning_rate * tree.predict_value(X)[:, 0]
        return raw

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid(self.raw_scores(X))

    def to_params(self) -> dict:
        return {
            "kind": "BoostedTreesModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "prior": self.prior,
            "learning_rate": self.learning_rate,
            "train_losses": self.train_losses,
            "trees": [t.to_params() for t in self.trees],
        }

    @classmethod
    def from_params(cls, params: dict) -> "BoostedTreesModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            float(params["prior"]),
            float(params["learning_rate"]),
            [Tree.from_params(p) for p in params["trees"]],
            np.asarray(params["train_losses"]),
        )


def train_boosted_trees(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> BoostedTreesModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    family = spec.family

    n_estimators = int(hp.get("n_estimators", 100))
    learning_rate = float(hp.get("learning_rate", 0.1))
    max_depth = hp.get("max_depth", 3)
    if n_estimators < 1 or learning_rate <= 0:
        raise ConfigError("n_estimators must be >= 1 and learning_rate > 0")

    if family == "XGBoostStyle":
        subsample = float(hp.get("subsample", 1.0))
        colsample = float(hp.get("colsample_bytree", 1.0))
        reg_lambda = float(hp.get("reg_lambda", 1.0))
        min_child_weight = float(hp.get("min_child_weight", 1.0))
        max_leaves = None
    elif family == "LightGBMStyle":
        subsample = float(hp.get("subsample", 1.0))
        colsample = 1.0
        reg_lambda = 0.0
        min_child_weight = 0.0
        max_leaves = int(hp.get("num_leaves", 31))
    else:  # GradientBoosting
        subsample = 1.0
        colsample = 1.0
        reg_lambda = 0.0
        min_child_weight = 0.0
        max_leaves = None

    n, d = X.shape
    ybar = y01.mean()
    prior = float(np.log(ybar / (1.0 - ybar)))
    raw = np.full(n, prior)
    trees: list[Tree] = []
    losses: list[float] = []
    rng = np.random.default_rng(spec.seed & 0xFFFFFFFFFFFF)
    for _ in range(n_estimators):
        p = _sigmoid(raw)
        grad = p - y01
        hess = np.maximum(p * (1.0 - p), 1e-12)
        rows = np.arange(n)
        if subsample < 1.0:
            rows = np.sort(rng.choice(n, size=max(1, int(round(subsample * n))), replace=False))
        feat_ids = None
        if colsample < 1.0:
            feat_ids = np.sort(rng.choice(d, size=max(1, int(round(colsample * d))), replace=False))
        tree = grow_gradient_tree(
            X[rows],
            grad[rows],
            hess[rows],
            reg_lambda=reg_lambda,
            max_depth=max_depth,
            min_child_weight=min_child_weight,
            max_leaves=max_leaves,
            leaf_clip=_LEAF_CLIP,
            feat_ids=feat_ids,
        )
        raw = raw + learning_rate * tree.predict_value(X)[:, 0]
        trees.append(tree)
        losses.append(_log_loss(y01, raw))
    return BoostedTreesModel(
        spec, classes, d, prior, learning_rate, trees, np.asarray(losses)
    )
