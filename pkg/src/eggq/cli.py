"""Command-line pipeline orchestrator.

Subcommands: ingest, evaluate, ensemble, report, extract-check. Runs are
driven by a YAML configuration validated into :class:`RunConfig`. All
metric files are byte-reproducible from (inputs, config, seed);
timestamps appear only in ``manifest.json``.
"""

from __future__ import annotations

import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import wraps
from pathlib import Path

import click
import numpy as np
import yaml

from . import __version__
from .bundle import ModelBundle, config_digest, save_bundle
from .classifiers import ClassifierSpec, train
from .classifiers.base import FAMILIES, best_spec
from .data import (
    TABULAR_FEATURES,
    LabeledDataset,
    MatrixKind,
    Task,
    build_labeled_dataset,
    fuse,
    load_feature_matrix,
    load_measurements,
    save_feature_matrix,
    tabular_matrix,
)
from .errors import ConfigError, EggQError, IngestionError
from .evaluation import (
    MODES,
    EvaluationReport,
    TransformConfig,
    cross_validate,
    grid_search,
    run_ensemble,
)
from .pca import fit_pca, project
from .presets import BACKBONE_DIMS, ENSEMBLE_PRESETS, get_preset, reference_cell
from .smote import SmoteConfig, smote_resample

_TASKS = {"grade": Task.Grade, "freshness": Task.Freshness}
_MODALITIES = ("tabular", "image", "multimodal")


def n_threads() -> int:
    """Worker cap from EGGQ_THREADS (default: all cores)."""
    raw = os.environ.get("EGGQ_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"EGGQ_THREADS must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"EGGQ_THREADS must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class RunConfig:
    task: str
    measurements: Path
    features: dict[str, Path]
    seed: int
    mode: str = "paper"
    tabular: tuple[str, ...] = TABULAR_FEATURES
    variance_target: float = 0.99
    smote_k: int = 5
    folds: int = 10
    families: tuple[str, ...] = FAMILIES
    modalities: tuple[str, ...] = _MODALITIES
    hyperparameters: str = "best"  # "best" (published cells) or "grid"
    ensemble_members: tuple[tuple[str, str], ...] = ()

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "measurements": str(self.measurements),
            "features": {k: str(v) for k, v in sorted(self.features.items())},
            "seed": self.seed,
            "mode": self.mode,
            "tabular": list(self.tabular),
            "variance_target": self.variance_target,
            "smote_k": self.smote_k,
            "folds": self.folds,
            "families": list(self.families),
            "modalities": list(self.modalities),
            "hyperparameters": self.hyperparameters,
            "ensemble_members": [list(m) for m in self.ensemble_members],
        }


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    _require(path.exists(), f"config file not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    _require(isinstance(raw, dict), f"{path}: config must be a mapping")
    known = {
        "task", "measurements", "features", "seed", "mode", "tabular",
        "variance_target", "smote_k", "folds", "families", "modalities",
        "hyperparameters", "ensemble_members",
    }
    unknown = sorted(set(raw) - known)
    _require(not unknown, f"{path}: unknown config keys {unknown}")
    for key in ("task", "measurements", "features", "seed"):
        _require(key in raw, f"{path}: missing required key {key!r}")
    _require(raw["task"] in _TASKS, f"task must be one of {sorted(_TASKS)}")
    mode = raw.get("mode", "paper")
    _require(mode in MODES, f"mode must be one of {list(MODES)}")
    meas = Path(raw["measurements"])
    _require(meas.exists(), f"measurements file not found: {meas}")
    _require(
        isinstance(raw["features"], dict) and raw["features"],
        "features must be a non-empty mapping of tag -> csv path",
    )
    features = {str(t): Path(p) for t, p in raw["features"].items()}
    for tag, p in features.items():
        _require(p.exists(), f"feature file for {tag!r} not found: {p}")
    tab = tuple(raw.get("tabular", list(TABULAR_FEATURES)))
    bad = [t for t in tab if t not in TABULAR_FEATURES]
    _require(not bad, f"unknown tabular features {bad}")
    fams = tuple(raw.get("families", list(FAMILIES)))
    bad = [f for f in fams if f not in FAMILIES]
    _require(not bad, f"unknown classifier families {bad}")
    mods = tuple(raw.get("modalities", list(_MODALITIES)))
    bad = [m for m in mods if m not in _MODALITIES]
    _require(not bad, f"unknown modalities {bad}")
    hp = raw.get("hyperparameters", "best")
    _require(hp in ("best", "grid"), "hyperparameters must be 'best' or 'grid'")
    vt = float(raw.get("variance_target", 0.99))
    _require(0.0 < vt <= 1.0, "variance_target must be in (0, 1]")
    folds = int(raw.get("folds", 10))
    _require(folds >= 2, "folds must be >= 2")
    members = tuple(
        (str(m[0]), str(m[1])) for m in raw.get("ensemble_members", [])
    )
    for tag, fam in members:
        _require(tag in features, f"ensemble member extractor {tag!r} has no feature file")
        _require(fam in FAMILIES, f"ensemble member family {fam!r} unknown")
    return RunConfig(
        task=raw["task"],
        measurements=meas,
        features=features,
        seed=int(raw["seed"]),
        mode=mode,
        tabular=tab,
        variance_target=vt,
        smote_k=int(raw.get("smote_k", 5)),
        folds=folds,
        families=fams,
        modalities=mods,
        hyperparameters=hp,
        ensemble_members=members,
    )


def _build_datasets(config: RunConfig) -> dict[str, LabeledDataset]:
    """Labeled datasets keyed by '<modality>/<tag>' (or 'tabular')."""
    table = load_measurements(config.measurements)
    task = _TASKS[config.task]
    out: dict[str, LabeledDataset] = {}
    if "tabular" in config.modalities:
        out["tabular"] = build_labeled_dataset(tabular_matrix(table), table, task)
    for tag, path in sorted(config.features.items()):
        image = load_feature_matrix(path)
        if "image" in config.modalities:
            out[f"image/{tag}"] = build_labeled_dataset(image, table, task)
        if "multimodal" in config.modalities:
            fused = fuse(image, table, config.tabular)
            out[f"multimodal/{tag}"] = build_labeled_dataset(fused, table, task)
    return out


def _transform_config(config: RunConfig) -> TransformConfig:
    return TransformConfig(
        smote=SmoteConfig(k_neighbors=config.smote_k, seed=config.seed),
        variance_target=config.variance_target,
    )


def _json_bytes(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode()


def _write_manifest(out: Path, config_dict: dict, extra: dict | None = None) -> None:
    manifest = {
        "config": config_dict,
        "config_digest": config_digest(config_dict),
        "code_version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if extra:
        manifest.update(extra)
    (out / "manifest.json").write_bytes(_json_bytes(manifest))


def _write_confusion_csv(path: Path, report: EvaluationReport) -> None:
    neg, pos = report.classes
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["true_class", f"pred_{pos}", f"pred_{neg}"])
        w.writerow([pos, int(report.confusion[0, 0]), int(report.confusion[0, 1])])
        w.writerow([neg, int(report.confusion[1, 0]), int(report.confusion[1, 1])])


def _write_roc_csv(path: Path, curves: dict[str, EvaluationReport]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve", "fpr", "tpr", "auc"])
        for name, rep in curves.items():
            for fpr, tpr in rep.roc_points:
                w.writerow([name, repr(float(fpr)), repr(float(tpr)), repr(float(rep.auc))])


def _exit_on_error(fn):
    @wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except EggQError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Egg grade and freshness classification pipeline."""


def _parse_feature_args(pairs: tuple[str, ...]) -> dict[str, Path]:
    out: dict[str, Path] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--features expects tag=path, got {pair!r}")
        tag, _, path = pair.partition("=")
        out[tag] = Path(path)
    return out


@main.command()
@click.option("--measurements", required=True, type=click.Path())
@click.option("--features", "feature_pairs", multiple=True, help="tag=csv (repeatable)")
@click.option("--task", required=True, type=click.Choice(sorted(_TASKS)))
@click.option("--out", required=True, type=click.Path())
@_exit_on_error
def ingest(measurements: str, feature_pairs: tuple[str, ...], task: str, out: str) -> None:
    """Validate inputs and emit labeled, fused feature files."""
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    if not Path(measurements).exists():
        raise IngestionError(f"measurements file not found: {measurements}")
    features = _parse_feature_args(feature_pairs)
    for tag, p in features.items():
        if not p.exists():
            raise IngestionError(f"feature file for {tag!r} not found: {p}")
    table = load_measurements(measurements)
    task_enum = _TASKS[task]
    summary: dict = {
        "task": task,
        "rows": len(table),
        "measurement_exclusions": [
            {"egg_id": e.egg_id, "reason": e.reason} for e in table.exclusions
        ],
        "datasets": {},
    }
    tab_ds = build_labeled_dataset(tabular_matrix(table), table, task_enum)
    counts = tab_ds.label_counts()
    summary["label_counts"] = counts
    for tag, path in sorted(features.items()):
        image = load_feature_matrix(path)
        fused = fuse(image, table)
        ds = build_labeled_dataset(fused, table, task_enum)
        fused_path = out_dir / f"fused_{tag}.csv"
        save_feature_matrix(ds.features, fused_path)
        summary["datasets"][tag] = {
            "columns": ds.features.n_cols,
            "rows": ds.features.n_rows,
            "fused_csv": str(fused_path),
            "label_exclusions": len(ds.exclusions),
        }
    with (out_dir / "labels.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["egg_id", "label"])
        for egg_id, label in zip(tab_ds.features.egg_ids, tab_ds.labels):
            w.writerow([egg_id, label])
    (out_dir / "ingest.json").write_bytes(_json_bytes(summary))
    a, b = sorted(counts)
    click.echo(f"{len(table)} rows, {counts[a]} {a} / {counts[b]} {b}")


def _evaluate_cell(
    key: str,
    family: str,
    dataset: LabeledDataset,
    config: RunConfig,
    transform: TransformConfig,
) -> dict:
    if config.hyperparameters == "grid":
        spec, _ = grid_search(
            family, dataset, mode=config.mode, transform=transform,
            k=config.folds, seed=config.seed,
        )
    else:
        spec = best_spec(family, seed=config.seed)
    report = cross_validate(
        spec, dataset, mode=config.mode, transform=transform,
        k=config.folds, seed=config.seed,
    )
    modality = key.split("/")[0]
    try:
        ref = reference_cell(config.task, family, key)
    except ConfigError:
        ref = None
    cell = report.to_dict()
    cell["modality"] = modality
    cell["dataset"] = key
    cell["reference_accuracy_percent"] = ref
    cell["deviation_percent"] = (
        None if ref is None else round(report.mean_accuracy * 100 - ref, 4)
    )
    return cell


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(MODES), default=None,
              help="override the config's evaluation mode")
@click.option("--out", required=True, type=click.Path())
@_exit_on_error
def evaluate(config_path: str, mode: str | None, out: str) -> None:
    """Cross-validated leaderboard across families, extractors, modalities."""
    config = load_run_config(config_path)
    if mode is not None:
        config = RunConfig(**{**config.__dict__, "mode": mode})
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    datasets = _build_datasets(config)
    transform = _transform_config(config)
    jobs = [
        (f"{key}", family, ds)
        for key, ds in datasets.items()
        for family in config.families
    ]
    with ThreadPoolExecutor(max_workers=n_threads()) as pool:
        futures = [
            pool.submit(_evaluate_cell, key, family, ds, config, transform)
            for key, family, ds in jobs
        ]
        cells = [f.result() for f in futures]

    metrics = {
        "task": config.task,
        "mode": config.mode,
        "seed": config.seed,
        "cells": cells,
    }
    (out_dir / "metrics.json").write_bytes(_json_bytes(metrics))
    with (out_dir / "leaderboard.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([
            "family", "dataset", "modality", "mean_accuracy_percent",
            "accuracy_original_rows_percent", "auc",
            "reference_accuracy_percent", "deviation_percent",
        ])
        for cell in cells:
            orig = cell["accuracy_original_rows"]
            w.writerow([
                cell["family"], cell["dataset"], cell["modality"],
                round(cell["mean_accuracy"] * 100, 4),
                None if orig is None else round(orig * 100, 4),
                round(cell["auc"], 6),
                cell["reference_accuracy_percent"],
                cell["deviation_percent"],
            ])
    _write_manifest(out_dir, config.to_dict(), {"command": "evaluate"})
    click.echo(f"evaluated {len(cells)} cells -> {out_dir}")


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--preset", type=click.Choice(sorted(ENSEMBLE_PRESETS)), default=None)
@click.option("--out", required=True, type=click.Path())
@_exit_on_error
def ensemble(config_path: str, preset: str | None, out: str) -> None:
    """Majority-vote ensemble over out-of-fold member predictions."""
    config = load_run_config(config_path)
    if preset is not None:
        p = get_preset(preset)
        if p.task != config.task:
            raise ConfigError(
                f"preset {preset!r} is for task {p.task!r}, config says {config.task!r}"
            )
        members = p.members
        modality = p.modality
        reference = {"accuracy_percent": p.reference_accuracy, "auc": p.reference_auc}
    else:
        members = config.ensemble_members
        modality = "multimodal" if "multimodal" in config.modalities else "image"
        reference = None
    if len(members) < 2:
        raise ConfigError("ensemble needs at least 2 members (preset or ensemble_members)")
    missing = [t for t, _ in members if t not in config.features]
    if missing:
        raise ConfigError(f"no feature files for ensemble member extractors {missing}")

    config = RunConfig(**{**config.__dict__, "modalities": (modality,)})
    datasets = {
        key.split("/", 1)[1]: ds for key, ds in _build_datasets(config).items()
    }
    transform = _transform_config(config)
    member_specs = [(tag, best_spec(fam, seed=config.seed)) for tag, fam in members]
    report, member_reports = run_ensemble(
        member_specs, datasets, mode=config.mode, transform=transform,
        k=config.folds, seed=config.seed,
    )
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    metrics = {
        "task": config.task,
        "mode": config.mode,
        "seed": config.seed,
        "modality": modality,
        "preset": preset,
        "ensemble": report.to_dict(),
        "members": {name: rep.to_dict() for name, rep in member_reports.items()},
        "reference": reference,
        "deviation_percent": (
            None if reference is None
            else round(report.mean_accuracy * 100 - reference["accuracy_percent"], 4)
        ),
    }
    (out_dir / "metrics.json").write_bytes(_json_bytes(metrics))
    _write_confusion_csv(out_dir / "confusion.csv", report)
    curves = {"ensemble": report}
    curves.update(member_reports)
    _write_roc_csv(out_dir / "roc.csv", curves)
    _write_manifest(out_dir, config.to_dict(), {"command": "ensemble", "preset": preset})
    _save_ensemble_bundle(out_dir, config, member_specs, datasets, transform)
    click.echo(
        f"ensemble accuracy {report.mean_accuracy * 100:.2f}% "
        f"(AUC {report.auc:.2f}) -> {out_dir}"
    )


def _save_ensemble_bundle(
    out_dir: Path,
    config: RunConfig,
    member_specs: list[tuple[str, ClassifierSpec]],
    datasets: dict[str, LabeledDataset],
    transform: TransformConfig,
) -> None:
    """Fit members on the full (augmented, reduced) data and persist them.

    Members share one bundle per extractor tag since each tag has its own
    feature space; the bundle for the first tag also records the config.
    """
    for tag, spec in member_specs:
        ds = datasets[tag]
        X, y, _ = smote_resample(
            ds.features.values, np.asarray(ds.labels, dtype=object), transform.smote
        )
        pca = fit_pca(X, variance_target=transform.variance_target)
        model = train(spec, project(pca, X), y)
        bundle = ModelBundle(
            pipeline_config={**config.to_dict(), "member": [tag, spec.family]},
            pca=pca,
            members=(model,),
            classes=tuple(sorted(set(ds.labels))),
            feature_columns=ds.features.columns,
            member_tags=(f"{tag}/{spec.family}",),
        )
        save_bundle(bundle, out_dir / f"model_{tag}_{spec.family}.eggq")


def _load_roc_csv(path: Path) -> dict[str, tuple[np.ndarray, float]]:
    curves: dict[str, list[tuple[float, float]]] = {}
    aucs: dict[str, float] = {}
    with path.open() as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "fpr" not in reader.fieldnames:
            raise IngestionError(f"{path}: not a ROC csv (missing fpr column)")
        for row in reader:
            name = row.get("curve", "roc")
            curves.setdefault(name, []).append((float(row["fpr"]), float(row["tpr"])))
            aucs[name] = float(row["auc"])
    if not curves:
        raise IngestionError(f"{path}: ROC csv contains no points")
    return {n: (np.array(pts), aucs[n]) for n, pts in curves.items()}


@main.command()
@click.argument("bundle_dir", type=click.Path())
@_exit_on_error
def report(bundle_dir: str) -> None:
    """Render ROC and confusion-matrix figures from a run's CSV files."""
    out_dir = Path(bundle_dir)
    roc_path = out_dir / "roc.csv"
    conf_path = out_dir / "confusion.csv"
    for p in (roc_path, conf_path):
        if not p.exists():
            raise IngestionError(f"missing report input: {p}")

    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "eggq"  # deterministic SVG ids
    import matplotlib.pyplot as plt

    curves = _load_roc_csv(roc_path)
    fig, ax = plt.subplots(figsize=(6, 6))
    for name, (pts, auc) in curves.items():
        style = "-" if name == "ensemble" else "--"
        ax.plot(pts[:, 0], pts[:, 1], style, label=f"{name} (AUC {auc:.2f})")
    ax.plot([0, 1], [0, 1], ":", color="gray", label="chance")
    ax.set_xlabel("False positive rate")
    ax.set_ylabel("True positive rate")
    ax.set_title("ROC")
    ax.legend(loc="lower right", fontsize=8)
    fig.savefig(out_dir / "roc.svg", metadata={"Date": None})
    plt.close(fig)

    with conf_path.open() as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 3:
        raise IngestionError(f"{conf_path}: expected header plus two class rows")
    header, body = rows[0], rows[1:]
    labels = [r[0] for r in body]
    counts = np.array([[float(v) for v in r[1:]] for r in body])
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(header) - 1), [h.removeprefix("pred_") for h in header[1:]])
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("Predicted")
    ax.set_ylabel("True")
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(j, i, f"{counts[i, j]:.0f}", ha="center", va="center")
    fig.colorbar(im)
    ax.set_title("Confusion matrix")
    fig.savefig(out_dir / "confusion.svg", metadata={"Date": None})
    plt.close(fig)
    click.echo(f"wrote {out_dir / 'roc.svg'} and {out_dir / 'confusion.svg'}")


@main.command("extract-check")
@click.option("--features", required=True, type=click.Path())
@click.option("--backbone", required=True, type=click.Choice(sorted(BACKBONE_DIMS)))
@_exit_on_error
def extract_check(features: str, backbone: str) -> None:
    """Validate a feature CSV's dimensionality for a given backbone."""
    if not Path(features).exists():
        raise IngestionError(f"feature file not found: {features}")
    matrix = load_feature_matrix(features)
    expected = BACKBONE_DIMS[backbone]
    if matrix.n_cols != expected:
        raise IngestionError(
            f"{features}: {backbone} should export {expected} columns, "
            f"found {matrix.n_cols}"
        )
    click.echo(f"{features}: {matrix.n_rows} rows x {matrix.n_cols} columns OK")


if __name__ == "__main__":
    main()
