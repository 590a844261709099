"""Cross-validated evaluation: stratified fold planning, grid search,
majority-vote ensembling, and metrics (accuracy, confusion matrix,
pooled out-of-fold ROC/AUC).

Two modes:

* ``paper``: SMOTE and PCA are fitted once on the full dataset before
  splitting (augmentation -> transformation -> classification, as in the
  reference protocol). Synthetic rows appear in test folds; reported
  accuracy is over the augmented set, with the original-rows-only
  accuracy reported alongside.
* ``foldsafe``: SMOTE and PCA are fitted inside each training fold only;
  test folds contain exclusively original rows.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset
from .errors import ConfigError, DataError, NumericError
from .classifiers import ClassifierSpec, HyperparameterGrid, default_grid, train
from .pca import fit_pca, project
from .smote import SmoteConfig, smote_resample

MODES = ("paper", "foldsafe")


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # row index -> fold index
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)


def stratified_folds(labels, k: int, seed: int, stratified: bool = True) -> FoldPlan:
    """Assign each row to exactly one test fold; per-class proportions per
    fold stay within one sample of the global proportions."""
    labels = np.asarray(labels)
    n = len(labels)
    if k < 2:
        raise ConfigError(f"fold count must be >= 2, got {k}")
    rng = np.random.default_rng(seed)
    assignments = np.empty(n, dtype=np.intp)
    if stratified:
        # The round-robin position continues across classes so the folds
        # receiving each class's remainder differ, keeping total fold
        # sizes within one of each other as well as the per-class counts.
        position = 0
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            if idx.size < k:
                raise ConfigError(
                    f"class {c!r} has {idx.size} rows, fewer than k={k} folds"
                )
            idx = idx[rng.permutation(idx.size)]
            assignments[idx] = (position + np.arange(idx.size)) % k
            position = (position + idx.size) % k
    else:
        if n < k:
            raise ConfigError(f"{n} rows cannot fill k={k} folds")
        assignments[rng.permutation(n)] = np.arange(n) % k
    return FoldPlan(k=k, assignments=assignments, seed=seed)


@dataclass
class EvaluationReport:
    mode: str
    classes: tuple[str, str]           # (negative, positive)
    fold_accuracies: list[float]
    mean_accuracy: float
    confusion: np.ndarray              # 2x2 counts, rows = true class
    confusion_percent: np.ndarray      # row-normalized percentages
    roc_points: np.ndarray             # (m, 2) columns (fpr, tpr)
    auc: float
    hyperparameters: dict = field(default_factory=dict)
    family: str = ""
    accuracy_original_rows: float | None = None
    synthetic_in_test: int = 0
    predictions: np.ndarray | None = None
    scores: np.ndarray | None = None   # positive-class oof probabilities
    true_labels: np.ndarray | None = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "family": self.family,
            "hyperparameters": {
                k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.hyperparameters.items()
            },
            "classes": list(self.classes),
            "fold_accuracies": [float(a) for a in self.fold_accuracies],
            "mean_accuracy": float(self.mean_accuracy),
            "accuracy_original_rows": (
                None if self.accuracy_original_rows is None
                else float(self.accuracy_original_rows)
            ),
            "confusion": self.confusion.astype(int).tolist(),
            "confusion_percent": [[float(v) for v in row] for row in self.confusion_percent],
            "auc": float(self.auc),
            "synthetic_in_test": int(self.synthetic_in_test),
        }


def confusion_and_accuracy(
    labels, predictions, classes: tuple[str, str]
) -> tuple[np.ndarray, np.ndarray, float]:
    """2x2 confusion (rows = true, order = classes[::-1] so the positive
    class leads), row-normalized percentages, and accuracy."""
    labels = np.asarray(labels)
    predictions = np.asarray(predictions)
    if len(labels) != len(predictions):
        raise DataError("labels and predictions differ in length")
    order = (classes[1], classes[0])  # positive class first
    counts = np.zeros((2, 2), dtype=np.int64)
    for i, true_c in enumerate(order):
        for j, pred_c in enumerate(order):
            counts[i, j] = int(np.sum((labels == true_c) & (predictions == pred_c)))
    with np.errstate(invalid="ignore"):
        pct = 100.0 * counts / np.maximum(counts.sum(axis=1, keepdims=True), 1)
    acc = float(np.trace(counts) / len(labels))
    return counts, pct, acc


def roc_auc(scores, labels, positive_label) -> tuple[np.ndarray, float]:
    """ROC points over all distinct thresholds plus trapezoidal AUC."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    pos = labels == positive_label
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise NumericError("AUC undefined: labels contain a single class")
    order = np.argsort(-scores, kind="stable")
    sorted_pos = pos[order].astype(np.float64)
    tps = np.cumsum(sorted_pos)
    fps = np.cumsum(1.0 - sorted_pos)
    # Collapse tied scores to one ROC point (threshold boundaries only).
    distinct = np.r_[np.flatnonzero(np.diff(scores[order])), len(scores) - 1]
    tpr = np.r_[0.0, tps[distinct] / n_pos]
    fpr = np.r_[0.0, fps[distinct] / n_neg]
    auc = float(np.trapezoid(tpr, fpr))
    return np.column_stack([fpr, tpr]), auc


def majority_vote(predictions: list[np.ndarray], probabilities: list[np.ndarray] | None = None) -> np.ndarray:
    """Per-row modal label; ties resolve to the label with the higher
    mean probability across members."""
    if len(predictions) < 2:
        raise ConfigError("majority vote needs at least 2 members")
    if len(predictions) % 2 == 0:
        warnings.warn("even member count: ties possible, probability tie-break applies", stacklevel=2)
    lengths = {len(p) for p in predictions}
    if len(lengths) != 1:
        raise DataError("member prediction vectors differ in length")
    preds = np.stack([np.asarray(p) for p in predictions])
    classes = np.unique(preds)
    votes = np.stack([(preds == c).sum(axis=0) for c in classes])  # (n_classes, n_rows)
    top = votes.max(axis=0)
    out = np.empty(preds.shape[1], dtype=preds.dtype)
    if probabilities is not None:
        mean_p1 = np.mean([np.asarray(p)[:, 1] for p in probabilities], axis=0)
    for row in range(preds.shape[1]):
        winners = [c for ci, c in enumerate(classes) if votes[ci, row] == top[row]]
        if len(winners) == 1:
            out[row] = winners[0]
        else:
            if probabilities is None:
                raise DataError("vote tie with no probabilities to break it")
            # Binary tie: classes sorted, index 1 is the probability target.
            out[row] = classes[1] if mean_p1[row] >= 0.5 else classes[0]
    return out


@dataclass(frozen=True)
class TransformConfig:
    smote: SmoteConfig = SmoteConfig()
    variance_target: float = 0.99
    use_pca: bool = True
    standardize_pca: bool = False


def _oof_predictions(
    spec: ClassifierSpec,
    dataset: LabeledDataset,
    plan: FoldPlan | None,
    mode: str,
    transform: TransformConfig,
    k: int,
    seed: int,
):
    """Out-of-fold predictions and probabilities for one classifier.

    Returns (labels, predictions, positive-probabilities, synthetic_mask,
    plan, fold_accuracies, synthetic_in_test).
    """
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    X = dataset.features.values
    y = np.asarray(dataset.labels)

    if mode == "paper":
        X2, y2, syn = smote_resample(X, y, transform.smote)
        if transform.use_pca:
            model = fit_pca(X2, transform.variance_target, transform.standardize_pca)
            Z = project(model, X2)
        else:
            Z = X2
        if plan is None:
            plan = stratified_folds(y2, k, seed)
        elif len(plan.assignments) != len(y2):
            raise ConfigError("fold plan does not cover the augmented rows")
        preds = np.empty(len(y2), dtype=y.dtype)
        probas = np.empty(len(y2))
        fold_acc = []
        syn_in_test = 0
        for fold in range(plan.k):
            tr, te = plan.train_indices(fold), plan.test_indices(fold)
            model_f = train(spec, Z[tr], y2[tr])
            p = model_f.predict_proba(Z[te])
            pred = model_f.classes_[np.argmax(p, axis=1)]
            preds[te] = pred
            probas[te] = p[:, 1]
            fold_acc.append(float(np.mean(pred == y2[te])))
            syn_in_test += int(syn[te].sum())
        return y2, preds, probas, syn, plan, fold_acc, syn_in_test

    # foldsafe
    if plan is None:
        plan = stratified_folds(y, k, seed)
    elif len(plan.assignments) != len(y):
        raise ConfigError("fold plan does not cover the dataset rows")
    preds = np.empty(len(y), dtype=y.dtype)
    probas = np.empty(len(y))
    fold_acc = []
    for fold in range(plan.k):
        tr, te = plan.train_indices(fold), plan.test_indices(fold)
        Xtr, ytr = smote_resample(X[tr], y[tr], transform.smote)[:2]
        if transform.use_pca:
            model = fit_pca(Xtr, transform.variance_target, transform.standardize_pca)
            Ztr, Zte = project(model, Xtr), project(model, X[te])
        else:
            Ztr, Zte = Xtr, X[te]
        model_f = train(spec, Ztr, ytr)
        p = model_f.predict_proba(Zte)
        pred = model_f.classes_[np.argmax(p, axis=1)]
        preds[te] = pred
        probas[te] = p[:, 1]
        fold_acc.append(float(np.mean(pred == y[te])))
    syn = np.zeros(len(y), dtype=bool)
    return y, preds, probas, syn, plan, fold_acc, 0


def _build_report(
    spec, mode, y, preds, probas, syn, fold_acc, syn_in_test, positive_label
) -> EvaluationReport:
    classes = tuple(sorted(np.unique(y).tolist()))
    counts, pct, _ = confusion_and_accuracy(y, preds, (  # positive-first layout
        [c for c in classes if c != positive_label][0], positive_label,
    ))
    roc_points, auc = roc_auc(_positive_scores(probas, classes, positive_label), y, positive_label)
    orig = ~syn
    return EvaluationReport(
        mode=mode,
        classes=([c for c in classes if c != positive_label][0], positive_label),
        fold_accuracies=fold_acc,
        mean_accuracy=float(np.mean(fold_acc)),
        confusion=counts,
        confusion_percent=pct,
        roc_points=roc_points,
        auc=auc,
        hyperparameters=dict(spec.hyperparameters),
        family=spec.family,
        accuracy_original_rows=float(np.mean(preds[orig] == y[orig])),
        synthetic_in_test=syn_in_test,
        predictions=preds,
        scores=_positive_scores(probas, classes, positive_label),
        true_labels=y,
    )


def _positive_scores(probas: np.ndarray, classes, positive_label) -> np.ndarray:
    # probas column 1 tracks sorted(classes)[1]
    return probas if sorted(classes)[1] == positive_label else 1.0 - probas


def cross_validate(
    spec: ClassifierSpec,
    dataset: LabeledDataset,
    plan: FoldPlan | None = None,
    mode: str = "paper",
    transform: TransformConfig = TransformConfig(),
    k: int = 10,
    seed: int = 0,
    positive_label: str | None = None,
) -> EvaluationReport:
    """Evaluate one classifier spec under k-fold cross-validation."""
    if positive_label is None:
        positive_label = sorted(set(dataset.labels))[0]
    y, preds, probas, syn, plan, fold_acc, sit = _oof_predictions(
        spec, dataset, plan, mode, transform, k, seed
    )
    return _build_report(spec, mode, y, preds, probas, syn, fold_acc, sit, positive_label)


def _simplicity_key(hp: dict) -> tuple:
    depth = hp.get("max_depth")
    depth = np.inf if depth is None else depth
    return (
        hp.get("n_estimators", 0),
        depth,
        hp.get("C", 0),
        repr(sorted((k, str(v)) for k, v in hp.items())),
    )


def grid_search(
    family: str,
    dataset: LabeledDataset,
    plan: FoldPlan | None = None,
    mode: str = "paper",
    grid: HyperparameterGrid | None = None,
    transform: TransformConfig = TransformConfig(),
    k: int = 10,
    seed: int = 0,
) -> tuple[ClassifierSpec, list[dict]]:
    """Exhaustive search over a hyperparameter grid by mean CV accuracy.

    Ties break toward the simplest model (fewer boosting rounds, smaller
    depth, lower C), then lexicographic parameter order. The leaderboard
    retains every cell's mean and per-fold accuracies.
    """
    if grid is None:
        grid = default_grid(family)
    cells = grid.cells()
    if not cells:
        raise ConfigError("empty hyperparameter grid")
    leaderboard = []
    for cell in cells:
        spec = ClassifierSpec(family=family, hyperparameters=cell, seed=seed)
        report = cross_validate(spec, dataset, plan, mode, transform, k, seed)
        leaderboard.append(
            {
                "hyperparameters": cell,
                "mean_accuracy": report.mean_accuracy,
                "fold_accuracies": report.fold_accuracies,
            }
        )
    best = min(
        leaderboard,
        key=lambda e: (-e["mean_accuracy"],) + _simplicity_key(e["hyperparameters"]),
    )
    best_spec = ClassifierSpec(family=family, hyperparameters=best["hyperparameters"], seed=seed)
    return best_spec, leaderboard


def run_ensemble(
    members: list[tuple[str, ClassifierSpec]],
    datasets: dict[str, LabeledDataset],
    mode: str = "paper",
    transform: TransformConfig = TransformConfig(),
    k: int = 10,
    seed: int = 0,
    positive_label: str | None = None,
) -> tuple[EvaluationReport, dict[str, EvaluationReport]]:
    """Majority-vote ensemble over out-of-fold member predictions.

    Members are (extractor tag, classifier spec); all member datasets
    must be row-aligned (same eggs, same labels) so one fold plan covers
    every member. The ensemble ROC uses the arithmetic mean of member
    probabilities, pooled over test folds.
    """
    if len(members) < 2:
        raise ConfigError("ensemble needs at least 2 members")
    tags = [tag for tag, _ in members]
    missing = [t for t in tags if t not in datasets]
    if missing:
        raise ConfigError(f"no dataset for ensemble member tags {missing}")
    ref = datasets[tags[0]]
    for t in tags[1:]:
        d = datasets[t]
        if d.features.egg_ids != ref.features.egg_ids or d.labels != ref.labels:
            raise DataError(f"member dataset {t!r} is not row-aligned with {tags[0]!r}")
    if positive_label is None:
        positive_label = sorted(set(ref.labels))[0]

    plan: FoldPlan | None = None
    member_outputs = []
    member_reports: dict[str, EvaluationReport] = {}
    for i, (tag, spec) in enumerate(members):
        y, preds, probas, syn, plan, fold_acc, sit = _oof_predictions(
            spec, datasets[tag], plan, mode, transform, k, seed
        )
        member_outputs.append((y, preds, probas, syn))
        member_reports[f"{tag}/{spec.family}#{i}"] = _build_report(
            spec, mode, y, preds, probas, syn, fold_acc, sit, positive_label
        )

    y, _, _, syn = member_outputs[0]
    classes = sorted(np.unique(y).tolist())
    preds_list = [p for _, p, _, _ in member_outputs]
    probas_list = [np.column_stack([1 - pr, pr]) for _, _, pr, _ in member_outputs]
    ens_pred = majority_vote(preds_list, probas_list)
    ens_proba = np.mean([pr for _, _, pr, _ in member_outputs], axis=0)

    plan_acc = [
        float(np.mean(ens_pred[plan.test_indices(f)] == y[plan.test_indices(f)]))
        for f in range(plan.k)
    ]
    counts, pct, _ = confusion_and_accuracy(
        y, ens_pred, ([c for c in classes if c != positive_label][0], positive_label)
    )
    scores = _positive_scores(ens_proba, classes, positive_label)
    roc_points, auc = roc_auc(scores, y, positive_label)
    orig = ~syn
    report = EvaluationReport(
        mode=mode,
        classes=([c for c in classes if c != positive_label][0], positive_label),
        fold_accuracies=plan_acc,
        mean_accuracy=float(np.mean(plan_acc)),
        confusion=counts,
        confusion_percent=pct,
        roc_points=roc_points,
        auc=auc,
        hyperparameters={"members": [f"{t}:{s.family}" for t, s in members]},
        family="Ensemble",
        accuracy_original_rows=float(np.mean(ens_pred[orig] == y[orig])),
        synthetic_in_test=sum(int(syn[plan.test_indices(f)].sum()) for f in range(plan.k)),
        predictions=ens_pred,
        scores=scores,
        true_labels=y,
    )
    return report, member_reports
