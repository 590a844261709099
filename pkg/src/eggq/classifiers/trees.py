"""Decision tree, bagged random forest, and adaptive boosting.

Random-forest bootstrap sampling is keyed to a content-based canonical
row order and a per-tree generator seeded from (seed, tree index), so
fitted forests do not depend on training-row order or on how tree fits
are scheduled.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ._tree import Tree, grow_classification_tree
from .base import (
    ClassifierModel,
    ClassifierSpec,
    canonical_row_order,
    check_training_data,
    class_weights,
)


class DecisionTreeModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, tree: Tree):
        super().__init__(spec, classes, n_features)
        self.tree = tree

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        return self.tree.predict_value(X)[:, 1]

    def to_params(self) -> dict:
        return {
            "kind": "DecisionTreeModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "tree": self.tree.to_params(),
        }

    @classmethod
    def from_params(cls, params: dict) -> "DecisionTreeModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            Tree.from_params(params["tree"]),
        )


def train_decision_tree(
    spec: ClassifierSpec,
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray | None = None,
) -> DecisionTreeModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    sw = class_weights(y01, hp.get("class_weight"))
    if sample_weight is not None:
        sw = sw * sample_weight
    tree = grow_classification_tree(
        X,
        y01,
        sw,
        criterion=hp.get("criterion", "gini"),
        max_depth=hp.get("max_depth"),
        min_samples_split=int(hp.get("min_samples_split", 2)),
    )
    return DecisionTreeModel(spec, classes, X.shape[1], tree)


class RandomForestModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, trees: list[Tree]):
        super().__init__(spec, classes, n_features)
        self.trees = trees

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros(X.shape[0])
        for tree in self.trees:
            total += tree.predict_value(X)[:, 1]
        return total / len(self.trees)

    def to_params(self) -> dict:
        return {
            "kind": "RandomForestModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "trees": [t.to_params() for t in self.trees],
        }

    @classmethod
    def from_params(cls, params: dict) -> "RandomForestModel":
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            [Tree.from_params(p) for p in params["trees"]],
        )


def train_random_forest(
    spec: ClassifierSpec,
    X: np.ndarray,
    y: np.ndarray,
    sample_weight: np.ndarray | None = None,
) -> RandomForestModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    n_estimators = int(hp.get("n_estimators", 100))
    if n_estimators < 1:
        raise ConfigError(f"n_estimators must be >= 1, got {n_estimators}")
    sw = class_weights(y01, hp.get("class_weight"))
    if sample_weight is not None:
        sw = sw * sample_weight

    n, d = X.shape
    canon = canonical_row_order(X, y01)
    max_features = max(1, int(round(np.sqrt(d))))
    trees: list[Tree] = []
    for t in range(n_estimators):
        rng = np.random.default_rng([spec.seed & 0xFFFFFFFF, t])
        boot = canon[rng.integers(0, n, size=n)]
        trees.append(
            grow_classification_tree(
                X[boot],
                y01[boot],
                sw[boot],
                criterion=hp.get("criterion", "gini"),
                max_depth=hp.get("max_depth"),
                min_samples_split=int(hp.get("min_samples_split", 2)),
                max_features=max_features,
                rng=rng,
            )
        )
    return RandomForestModel(spec, classes, d, trees)


class AdaBoostModel(ClassifierModel):
    def __init__(self, spec, classes, n_features, members: list, alphas: np.ndarray):
        super().__init__(spec, classes, n_features)
        self.members = members
        self.alphas = alphas

    def decision_scores(self, X: np.ndarray) -> np.ndarray:
        """Weighted vote margin in [-1, 1]; positive favors classes_[1]."""
        total = np.zeros(X.shape[0])
        for member, alpha in zip(self.members, self.alphas):
            vote = np.where(member.predict_proba(X)[:, 1] > 0.5, 1.0, -1.0)
            total += alpha * vote
        return total / self.alphas.sum()

    def _proba1(self, X: np.ndarray) -> np.ndarray:
        # Softmax over the two signed scores, i.e. sigmoid(2 * margin).
        s = self.decision_scores(X)
        return 1.0 / (1.0 + np.exp(-2.0 * s))

    def to_params(self) -> dict:
        return {
            "kind": "AdaBoostModel",
            "spec": self.spec.to_params(),
            "classes": self.classes_,
            "n_features": self.n_features,
            "alphas": self.alphas,
            "members": [m.to_params() for m in self.members],
        }

    @classmethod
    def from_params(cls, params: dict) -> "AdaBoostModel":
        kinds = {"DecisionTreeModel": DecisionTreeModel, "RandomForestModel": RandomForestModel}
        members = [kinds[p["kind"]].from_params(p) for p in params["members"]]
        return cls(
            ClassifierSpec.from_params(params["spec"]),
            np.asarray(params["classes"]),
            int(params["n_features"]),
            members,
            np.asarray(params["alphas"]),
        )


# Base-estimator settings for boosting: a stump for the tree base, a small
# shallow forest for the forest base (each member stays a weak learner).
_ADABOOST_BASES = {
    "DecisionTree": {"max_depth": 1},
    "RandomForest": {"n_estimators": 10, "max_depth": 3},
}


def train_adaboost(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> AdaBoostModel:
    X, y01, classes = check_training_data(X, y)
    hp = spec.hyperparameters
    n_estimators = int(hp.get("n_estimators", 50))
    learning_rate = float(hp.get("learning_rate", 1.0))
    base_family = hp.get("estimator", "DecisionTree")
    if base_family not in _ADABOOST_BASES:
        raise ConfigError(f"unsupported AdaBoost estimator {base_family!r}")
    trainer = train_decision_tree if base_family == "DecisionTree" else train_random_forest
    base_hp = dict(_ADABOOST_BASES[base_family])

    n = X.shape[0]
    w = np.full(n, 1.0 / n)
    ysign = 2.0 * y01 - 1.0
    members: list[ClassifierModel] = []
    alphas: list[float] = []
    for m in range(n_estimators):
        base_spec = ClassifierSpec(
            family=base_family, hyperparameters=base_hp, seed=spec.seed * 100003 + m
        )
        member = trainer(base_spec, X, y01, sample_weight=w)
        pred = np.where(member.predict_proba(X)[:, 1] > 0.5, 1.0, -1.0)
        mis = pred != ysign
        err = float(w[mis].sum())
        if err <= 0.0:
            members.append(member)
            alphas.append(1.0)
            break
        if err >= 0.5:
            if not members:  # keep at least one member, however weak
                members.append(member)
                alphas.append(1e-10)
            break
        alpha = learning_rate * 0.5 * np.log((1.0 - err) / err)
        members.append(member)
        alphas.append(alpha)
        w = w * np.exp(alpha * np.where(mis, 1.0, -1.0))
        w /= w.sum()
    return AdaBoostModel(spec, classes, X.shape[1], members, np.asarray(alphas))
