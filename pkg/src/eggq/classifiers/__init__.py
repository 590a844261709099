"""Classifier suite with one uniform train / predict / predict_proba
interface and built-in hyperparameter grids."""

from __future__ import annotations

import numpy as np

from .base import (
    BEST_HYPERPARAMETERS,
    FAMILIES,
    ClassifierModel,
    ClassifierSpec,
    HyperparameterGrid,
    best_spec,
    default_grid,
)
from .boosting import BoostedTreesModel, train_boosted_trees
from .linear import LogisticModel, train_logistic
from .mlp import MlpModel, train_mlp
from .svm import SvcModel, train_svc
from .trees import (
    AdaBoostModel,
    DecisionTreeModel,
    RandomForestModel,
    train_adaboost,
    train_decision_tree,
    train_random_forest,
)

_TRAINERS = {
    "LogisticRegression": train_logistic,
    "DecisionTree": train_decision_tree,
    "RandomForest": train_random_forest,
    "SVC": train_svc,
    "GradientBoosting": train_boosted_trees,
    "MLP": train_mlp,
    "XGBoostStyle": train_boosted_trees,
    "LightGBMStyle": train_boosted_trees,
    "AdaBoost": train_adaboost,
}

_MODEL_KINDS = {
    "LogisticModel": LogisticModel,
    "DecisionTreeModel": DecisionTreeModel,
    "RandomForestModel": RandomForestModel,
    "SvcModel": SvcModel,
    "BoostedTreesModel": BoostedTreesModel,
    "MlpModel": MlpModel,
    "AdaBoostModel": AdaBoostModel,
}


def train(spec: ClassifierSpec, X: np.ndarray, y: np.ndarray) -> ClassifierModel:
    """Fit a classifier; deterministic given (spec, X, y)."""
    return _TRAINERS[spec.family](spec, X, y)


def predict(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    return model.predict(X)


def predict_proba(model: ClassifierModel, X: np.ndarray) -> np.ndarray:
    return model.predict_proba(X)


def model_from_params(params: dict) -> ClassifierModel:
    return _MODEL_KINDS[params["kind"]].from_params(params)


__all__ = [
    "BEST_HYPERPARAMETERS",
    "FAMILIES",
    "ClassifierModel",
    "ClassifierSpec",
    "HyperparameterGrid",
    "best_spec",
    "default_grid",
    "train",
    "predict",
    "predict_proba",
    "model_from_params",
]
