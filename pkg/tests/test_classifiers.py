"""From-scratch classifier correctness: analytic-vs-numeric gradients,
memorization capacity, boosting loss monotonicity, probability-simplex
invariants, determinism, and the hyperparameter search spaces."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eggq.classifiers import model_from_params, train
from eggq.classifiers.base import (
    BEST_HYPERPARAMETERS,
    FAMILIES,
    ClassifierSpec,
    best_spec,
    class_weights,
    default_grid,
)
from eggq.classifiers.linear import loss_and_grad
from eggq.classifiers.mlp import init_layers, loss_and_grads


def two_blob_data(seed=0, n=60, d=5, gap=3.0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    X[: n // 2] += gap
    y = np.array(["pos"] * (n // 2) + ["neg"] * (n - n // 2))
    return X, y


class TestGradientChecks:
    def test_logistic_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(40, 6))
        y01 = (rng.random(40) > 0.5).astype(np.int64)
        w = rng.normal(size=40) + 0.5
        params = rng.normal(size=7)
        _, grad = loss_and_grad(params, X, y01, w, l2=0.3)
        eps = 1e-6
        for i in range(len(params)):
            up, dn = params.copy(), params.copy()
            up[i] += eps
            dn[i] -= eps
            num = (loss_and_grad(up, X, y01, w, 0.3)[0] - loss_and_grad(dn, X, y01, w, 0.3)[0]) / (2 * eps)
            assert abs(grad[i] - num) <= 1e-4 * max(abs(num), 1.0)

    def test_mlp_gradients_match_finite_differences(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(25, 4))
        y01 = (rng.random(25) > 0.5).astype(np.int64)
        for activation in ("relu", "tanh"):
            weights, biases = init_layers((4, 6, 3, 1), np.random.default_rng(2))
            # Shift activations away from the relu kink so the numeric
            # derivative is well-defined at every probe point.
            biases = [b + 0.1 for b in biases]
            _, gw, gb = loss_and_grads(weights, biases, X, y01, activation, alpha=0.01)
            eps = 1e-6
            for li in range(len(weights)):
                flat_idx = [(0, 0), (weights[li].shape[0] - 1, weights[li].shape[1] - 1)]
                for r, c in flat_idx:
                    for arrs, grads, key in ((weights, gw, (r, c)), (biases, gb, c)):
                        orig = arrs[li][key]
                        arrs[li][key] = orig + eps
                        lp = loss_and_grads(weights, biases, X, y01, activation, 0.01)[0]
                        arrs[li][key] = orig - eps
                        lm = loss_and_grads(weights, biases, X, y01, activation, 0.01)[0]
                        arrs[li][key] = orig
                        num = (lp - lm) / (2 * eps)
                        assert abs(grads[li][key] - num) <= 1e-4 * max(abs(num), 1.0), (
                            activation, li, key
                        )


class TestTrees:
    def test_unrestricted_tree_memorizes_distinct_rows(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(80, 4))
        y = np.array(["a", "b"] * 40)
        spec = ClassifierSpec("DecisionTree", {"max_depth": None}, seed=0)
        model = train(spec, X, y)
        assert (model.predict(X) == y).mean() == 1.0

    def test_stump_cannot_memorize_xor(self):
        X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        y = np.array(["a", "b", "b", "a"])
        spec = ClassifierSpec("DecisionTree", {"max_depth": 1}, seed=0)
        model = train(spec, X, y)
        assert (model.predict(X) == y).mean() <= 0.75

    def test_logistic_bounded_on_xor(self):
        # Brute-force oracle: no linear separator beats 0.75 on XOR.
        X = np.repeat(np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float), 10, axis=0)
        y = np.repeat(np.array(["a", "b", "b", "a"]), 10)
        model = train(best_spec("LogisticRegression"), X, y)
        assert (model.predict(X) == y).mean() <= 0.75

    def test_forest_better_or_equal_single_tree_on_blobs(self):
        X, y = two_blob_data(seed=4, gap=1.0)
        tree = train(ClassifierSpec("DecisionTree", {"max_depth": 2}, 0), X, y)
        forest = train(
            ClassifierSpec("RandomForest", {"n_estimators": 50, "max_depth": 2}, 0), X, y
        )
        assert (forest.predict(X) == y).mean() >= (tree.predict(X) == y).mean() - 0.05


class TestBoosting:
    @pytest.mark.parametrize("family", ["GradientBoosting", "XGBoostStyle", "LightGBMStyle"])
    def test_training_loss_non_increasing(self, family):
        X, y = two_blob_data(seed=5, gap=1.2)
        # Full-sample boosting; row/column subsampling deliberately makes
        # per-round loss stochastic, so monotonicity only holds at 1.0.
        hp = dict(BEST_HYPERPARAMETERS[family])
        hp.pop("subsample", None)
        hp.pop("colsample_bytree", None)
        spec = ClassifierSpec(family, hp, seed=0)
        model = train(spec, X, y)
        losses = np.asarray(model.train_losses)
        assert np.all(np.diff(losses) <= 1e-9)

    def test_adaboost_improves_over_stump(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(100, 2))
        y = np.where((X[:, 0] > 0) ^ (X[:, 1] > 0), "a", "b")
        stump = train(ClassifierSpec("DecisionTree", {"max_depth": 1}, 0), X, y)
        boosted = train(
            ClassifierSpec(
                "AdaBoost",
                {"n_estimators": 100, "learning_rate": 1.0, "estimator": "DecisionTree"},
                0,
            ),
            X, y,
        )
        assert (boosted.predict(X) == y).mean() > (stump.predict(X) == y).mean()


class TestSimplexInvariant:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_probabilities_form_simplex_on_10k_rows(self, family):
        X, y = two_blob_data(seed=7, n=80, gap=1.5)
        model = train(best_spec(family), X, y)
        rng = np.random.default_rng(8)
        Xq = rng.normal(scale=4.0, size=(10_000, X.shape[1]))
        proba = model.predict_proba(Xq)
        assert proba.shape == (10_000, 2)
        assert np.all(proba >= 0) and np.all(proba <= 1)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-9)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_predict_is_argmax_of_proba(self, family):
        X, y = two_blob_data(seed=9, gap=1.0)
        model = train(best_spec(family), X, y)
        proba = model.predict_proba(X)
        labels = np.asarray(model.classes_)[proba.argmax(axis=1)]
        assert np.array_equal(model.predict(X), labels)


class TestDeterminism:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_same_seed_identical_model(self, family):
        X, y = two_blob_data(seed=10, gap=1.0)
        a = train(best_spec(family, seed=5), X, y)
        b = train(best_spec(family, seed=5), X, y)
        assert np.array_equal(a.predict_proba(X), b.predict_proba(X))

    @pytest.mark.parametrize("family", FAMILIES)
    def test_params_round_trip_prediction_identical(self, family):
        X, y = two_blob_data(seed=11, gap=1.0)
        model = train(best_spec(family), X, y)
        clone = model_from_params(model.to_params())
        rng = np.random.default_rng(12)
        Xq = rng.normal(size=(50, X.shape[1]))
        assert np.array_equal(model.predict_proba(Xq), clone.predict_proba(Xq))

    def test_forest_invariant_to_row_permutation(self):
        X, y = two_blob_data(seed=13, gap=1.0)
        rng = np.random.default_rng(14)
        perm = rng.permutation(len(y))
        a = train(best_spec("RandomForest"), X, y)
        b = train(best_spec("RandomForest"), X[perm], y[perm])
        assert np.array_equal(a.predict_proba(X), b.predict_proba(X))


class TestClassWeights:
    def test_balanced_weights_equal_for_balanced_data(self):
        y01 = np.array([0, 1] * 10)
        assert np.allclose(class_weights(y01, "balanced"), 1.0)

    def test_balanced_weights_scale_inverse_frequency(self):
        y01 = np.array([0] * 30 + [1] * 10)
        w = class_weights(y01, "balanced")
        assert w[0] == pytest.approx(40 / 60)
        assert w[-1] == pytest.approx(40 / 20)
        assert w.sum() == pytest.approx(40)

    def test_none_weights_are_ones(self):
        y01 = np.array([0, 0, 1])
        assert np.array_equal(class_weights(y01, None), np.ones(3))


class TestSearchSpaces:
    EXPECTED = {
        "LogisticRegression": {
            "C": [0.1, 1, 10, 100],
            "penalty": ["l1", "l2"],
            "class_weight": [None, "balanced"],
        },
        "DecisionTree": {
            "max_depth": [None, 2, 5, 10, 20],
            "min_samples_split": [2, 5, 10],
            "criterion": ["gini", "entropy", "log_loss"],
            "class_weight": [None, "balanced"],
        },
        "RandomForest": {
            "n_estimators": [50, 100, 150],
            "max_depth": [None, 2, 5, 10, 20],
            "min_samples_split": [2, 5, 10],
            "criterion": ["gini", "entropy", "log_loss"],
            "class_weight": [None, "balanced"],
        },
        "SVC": {
            "C": [0.1, 1, 10],
            "kernel": ["linear", "poly", "rbf", "sigmoid"],
            "gamma": ["scale", "auto"],
            "class_weight": [None, "balanced"],
        },
        "GradientBoosting": {
            "n_estimators": [50, 100, 150],
            "learning_rate": [0.001, 0.01, 0.1],
            "max_depth": [3, 5],
        },
        "MLP": {
            "hidden_layer_sizes": [(8,), (16,), (8, 16), (16, 32)],
            "activation": ["relu", "tanh"],
            "learning_rate_init": [0.001, 0.01, 0.1],
            "alpha": [0.0001, 0.001],
            "solver": ["sgd", "adam"],
        },
        "XGBoostStyle": {
            "n_estimators": [50, 100, 150],
            "learning_rate": [0.001, 0.01, 0.1, 0.5],
            "max_depth": [2, 3, 5, 7],
            "subsample": [0.8, 1.0],
            "colsample_bytree": [0.8, 1.0],
            "reg_lambda": [0, 1],
            "min_child_weight": [1, 3, 5],
        },
        "LightGBMStyle": {
            "n_estimators": [50, 100, 150],
            "learning_rate": [0.01, 0.1],
            "max_depth": [2, 3, 5],
            "num_leaves": [5, 10, 15, 20],
            "subsample": [0.8, 1.0],
        },
        "AdaBoost": {
            "n_estimators": [50, 100, 200],
            "learning_rate": [0.001, 0.01, 0.1, 0.5, 1.0],
            "estimator": ["DecisionTree", "RandomForest"],
        },
    }

    BEST = {
        "LogisticRegression": {"C": 100, "penalty": "l2", "class_weight": None},
        "DecisionTree": {
            "max_depth": 2, "min_samples_split": 10,
            "criterion": "entropy", "class_weight": "balanced",
        },
        "RandomForest": {
            "n_estimators": 100, "max_depth": 10, "min_samples_split": 2,
            "criterion": "entropy", "class_weight": "balanced",
        },
        "SVC": {"C": 10, "kernel": "rbf", "gamma": "scale", "class_weight": None},
        "GradientBoosting": {"n_estimators": 100, "learning_rate": 0.1, "max_depth": 3},
        "MLP": {
            "hidden_layer_sizes": (16, 32), "activation": "relu",
            "learning_rate_init": 0.1, "alpha": 0.0001, "solver": "adam",
        },
        "XGBoostStyle": {
            "n_estimators": 50, "learning_rate": 0.5, "max_depth": 2,
            "subsample": 0.8, "colsample_bytree": 1.0,
            "reg_lambda": 0, "min_child_weight": 3,
        },
        "LightGBMStyle": {
            "n_estimators": 150, "learning_rate": 0.1, "max_depth": 3,
            "num_leaves": 10, "subsample": 0.8,
        },
        "AdaBoost": {
            "n_estimators": 100, "learning_rate": 0.01, "estimator": "RandomForest",
        },
    }

    def test_nine_families(self):
        assert len(FAMILIES) == 9
        assert set(self.EXPECTED) == set(FAMILIES)

    @pytest.mark.parametrize("family", FAMILIES)
    def test_grid_axes_verbatim(self, family):
        assert default_grid(family).axes == self.EXPECTED[family]

    @pytest.mark.parametrize("family", FAMILIES)
    def test_best_cells_verbatim(self, family):
        assert BEST_HYPERPARAMETERS[family] == self.BEST[family]

    def test_cells_cartesian_product(self):
        grid = default_grid("GradientBoosting")
        cells = grid.cells()
        assert len(cells) == 3 * 3 * 2
        assert len({tuple(sorted((k, str(v)) for k, v in c.items())) for c in cells}) == len(cells)


class TestTrainingQuality:
    @pytest.mark.parametrize("family", FAMILIES)
    def test_separable_blobs_high_accuracy(self, family):
        X, y = two_blob_data(seed=15, n=100, gap=3.0)
        model = train(best_spec(family), X, y)
        assert (model.predict(X) == y).mean() >= 0.95

    @settings(max_examples=15, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_logistic_matches_majority_on_uninformative_data(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(30, 3))
        y = np.array(["a"] * 20 + ["b"] * 10)
        model = train(ClassifierSpec("LogisticRegression", {"C": 0.1}, 0), X, y)
        # With noise features the fit should not be much worse than majority.
        assert (model.predict(X) == y).mean() >= 0.5
