"""Ingestion of measurement tables and feature matrices, sample-wise
fusion, and labeled-dataset construction.

File formats:
  measurements CSV header:
    egg_id,market,weight_g,width_mm,length_mm,yolk_height_mm,yolk_diameter_mm,albumen_height_mm
  feature CSV header:
    egg_id,f0,f1,...,f{K-1}

Loaded tables are immutable and safe to share read-only across threads.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from . import domain
from .domain import EggMeasurement, Fresh2, Grade2, Market
from .errors import (
    AlignmentError,
    DataError,
    HaughDomainError,
    IngestionError,
    InvalidMeasurementError,
)

MEASUREMENT_COLUMNS = (
    "egg_id",
    "market",
    "weight_g",
    "width_mm",
    "length_mm",
    "yolk_height_mm",
    "yolk_diameter_mm",
    "albumen_height_mm",
)

SCHEMA_VERSION = 1

TABULAR_FEATURES = ("weight", "shape_index")


class Task(str, Enum):
    Grade = "grade"
    Freshness = "freshness"


class MatrixKind(str, Enum):
    image = "image"
    tabular = "tabular"
    fused = "fused"


@dataclass(frozen=True)
class Exclusion:
    """A row dropped during ingestion or labeling, with the reason."""

    egg_id: str
    row_number: int
    reason: str


@dataclass(frozen=True)
class MeasurementTable:
    rows: tuple[EggMeasurement, ...]
    source: str
    schema_version: int = SCHEMA_VERSION
    exclusions: tuple[Exclusion, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def by_id(self) -> dict[str, EggMeasurement]:
        return {m.egg_id: m for m in self.rows}


@dataclass(frozen=True)
class FeatureMatrix:
    egg_ids: tuple[str, ...]
    columns: tuple[str, ...]
    values: np.ndarray  # (n_rows, n_cols) float64
    kind: MatrixKind

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape != (len(self.egg_ids), len(self.columns)):
            raise DataError(
                f"feature matrix shape {v.shape} does not match "
                f"{len(self.egg_ids)} ids x {len(self.columns)} columns"
            )
        if len(set(self.columns)) != len(self.columns):
            raise DataError("feature column names must be unique")
        if not np.all(np.isfinite(v)):
            raise DataError("feature matrix contains non-finite values")

    @property
    def n_rows(self) -> int:
        return len(self.egg_ids)

    @property
    def n_cols(self) -> int:
        return len(self.columns)


@dataclass(frozen=True)
class LabeledDataset:
    features: FeatureMatrix
    labels: tuple[str, ...]  # per-row binary target names
    task: Task
    exclusions: tuple[Exclusion, ...] = ()

    def __post_init__(self) -> None:
        if len(self.labels) != self.features.n_rows:
            raise DataError("label count does not match feature row count")
        if len(set(self.labels)) != 2:
            raise DataError(
                f"dataset must contain both classes, got {sorted(set(self.labels))}"
            )

    @property
    def classes(self) -> tuple[str, str]:
        return tuple(sorted(set(self.labels)))  # type: ignore[return-value]

    def label_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for lab in self.labels:
            out[lab] = out.get(lab, 0) + 1
        return out

    def y(self) -> np.ndarray:
        """Labels as 0/1 with classes in sorted order."""
        pos = self.classes[1]
        return np.array([1 if lab == pos else 0 for lab in self.labels], dtype=np.int64)


def load_measurements(path: str | Path) -> MeasurementTable:
    """Load and type-check a measurement CSV.

    Rows violating a physical precondition (e.g. zero yolk diameter) are
    excluded and reported via the table's `exclusions`; structural
    problems (missing column, duplicate id, unparseable numerics) raise
    IngestionError.
    """
    path = Path(path)
    header, records = _read_csv(path)
    missing = [c for c in MEASUREMENT_COLUMNS if c not in header]
    if missing:
        raise IngestionError(f"{path}: missing columns {missing}")
    idx = {c: header.index(c) for c in MEASUREMENT_COLUMNS}

    rows: list[EggMeasurement] = []
    exclusions: list[Exclusion] = []
    seen: set[str] = set()
    for row_no, rec in enumerate(records, start=2):
        if len(rec) != len(header):
            raise IngestionError(f"{path}:{row_no}: expected {len(header)} fields, got {len(rec)}")
        egg_id = rec[idx["egg_id"]].strip()
        if egg_id in seen:
            raise IngestionError(f"{path}:{row_no}: duplicate egg_id {egg_id!r}")
        seen.add(egg_id)
        try:
            market = Market(rec[idx["market"]].strip())
        except ValueError:
            raise IngestionError(
                f"{path}:{row_no}: unknown market {rec[idx['market']]!r}"
            ) from None
        nums = {}
        for col in MEASUREMENT_COLUMNS[2:]:
            raw = rec[idx[col]].strip()
            try:
                nums[col] = float(raw)
            except ValueError:
                raise IngestionError(
                    f"{path}:{row_no}: column {col!r}: cannot parse {raw!r}"
                ) from None
            if math.isnan(nums[col]):
                raise IngestionError(f"{path}:{row_no}: column {col!r} is NaN")
        try:
            rows.append(
                EggMeasurement(
                    egg_id=egg_id,
                    market=market,
                    weight=nums["weight_g"],
                    width=nums["width_mm"],
                    length=nums["length_mm"],
                    yolk_height=nums["yolk_height_mm"],
                    yolk_diameter=nums["yolk_diameter_mm"],
                    albumen_height=nums["albumen_height_mm"],
                )
            )
        except InvalidMeasurementError as exc:
            exclusions.append(Exclusion(egg_id, row_no, str(exc)))

    if not rows:
        warnings.warn(f"{path}: no valid measurement rows", stacklevel=2)
    return MeasurementTable(
        rows=tuple(rows), source=str(path), exclusions=tuple(exclusions)
    )


def load_feature_matrix(path: str | Path, kind: MatrixKind = MatrixKind.image) -> FeatureMatrix:
    """Load a feature CSV (egg_id column plus numeric feature columns)."""
    path = Path(path)
    header, records = _read_csv(path)
    if not header or header[0] != "egg_id":
        raise IngestionError(f"{path}: first column must be egg_id")
    columns = tuple(header[1:])
    if not columns:
        raise IngestionError(f"{path}: no feature columns")
    egg_ids: list[str] = []
    seen: set[str] = set()
    values = np.empty((len(records), len(columns)), dtype=np.float64)
    for i, rec in enumerate(records):
        row_no = i + 2
        if len(rec) != len(header):
            raise IngestionError(f"{path}:{row_no}: ragged row ({len(rec)} fields, expected {len(header)})")
        egg_id = rec[0].strip()
        if egg_id in seen:
            raise IngestionError(f"{path}:{row_no}: duplicate egg_id {egg_id!r}")
        seen.add(egg_id)
        egg_ids.append(egg_id)
        try:
            values[i] = [float(v) for v in rec[1:]]
        except ValueError as exc:
            raise IngestionError(f"{path}:{row_no}: {exc}") from None
        if not np.all(np.isfinite(values[i])):
            raise IngestionError(f"{path}:{row_no}: non-finite feature value")
    if not egg_ids:
        warnings.warn(f"{path}: empty feature matrix", stacklevel=2)
    return FeatureMatrix(
        egg_ids=tuple(egg_ids), columns=columns, values=values, kind=kind
    )


def save_feature_matrix(matrix: FeatureMatrix, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(("egg_id",) + matrix.columns)
        for egg_id, row in zip(matrix.egg_ids, matrix.values):
            w.writerow([egg_id] + [repr(float(v)) for v in row])


def tabular_matrix(
    measurements: MeasurementTable,
    egg_ids: tuple[str, ...] | None = None,
    spec: tuple[str, ...] = TABULAR_FEATURES,
) -> FeatureMatrix:
    """Tabular feature matrix (weight and/or shape index) for the given ids."""
    bad = [s for s in spec if s not in TABULAR_FEATURES]
    if bad:
        raise DataError(f"unknown tabular features {bad}; allowed: {list(TABULAR_FEATURES)}")
    by_id = measurements.by_id()
    if egg_ids is None:
        egg_ids = tuple(m.egg_id for m in measurements.rows)
    missing = [e for e in egg_ids if e not in by_id]
    if missing:
        raise AlignmentError(f"egg ids absent from measurements: {missing[:10]}")
    cols = []
    for name in spec:
        if name == "weight":
            cols.append([by_id[e].weight for e in egg_ids])
        else:
            cols.append([domain.shape_index(by_id[e].width, by_id[e].length) for e in egg_ids])
    values = np.array(cols, dtype=np.float64).T.reshape(len(egg_ids), len(spec))
    return FeatureMatrix(
        egg_ids=tuple(egg_ids), columns=tuple(spec), values=values, kind=MatrixKind.tabular
    )


def fuse(
    image: FeatureMatrix,
    measurements: MeasurementTable,
    tabular_spec: tuple[str, ...] = TABULAR_FEATURES,
    standardize_tabular: bool = False,
) -> FeatureMatrix:
    """Concatenate tabular features onto each image-feature row.

    Row order follows the image matrix. Tabular values are appended raw
    by default; `standardize_tabular` z-scores them first (scale mismatch
    with image activations is a known hazard, off by default to keep the
    plain-concatenation behavior).
    """
    if not tabular_spec:
        return image
    tab = tabular_matrix(measurements, image.egg_ids, tabular_spec)
    tv = tab.values
    if standardize_tabular:
        sd = tv.std(axis=0, ddof=0)
        sd[sd == 0] = 1.0
        tv = (tv - tv.mean(axis=0)) / sd
    return FeatureMatrix(
        egg_ids=image.egg_ids,
        columns=image.columns + tab.columns,
        values=np.hstack([image.values, tv]),
        kind=MatrixKind.fused,
    )


def derive_label(m: EggMeasurement, task: Task) -> str:
    """Binary label for one egg; raises HaughDomainError for degenerate
    albumen measurements on the grade task."""
    if task is Task.Grade:
        hu = domain.haugh_unit(m.albumen_height, m.weight)
        return domain.collapse_grade(domain.grade_label(hu)).value
    yi = domain.yolk_index(m.yolk_height, m.yolk_diameter)
    return domain.collapse_freshness(domain.freshness_label(yi)).value


def build_labeled_dataset(
    features: FeatureMatrix, measurements: MeasurementTable, task: Task
) -> LabeledDataset:
    """Attach binary labels (grade from HU, freshness from YI) to a
    feature matrix. Rows whose label cannot be derived are excluded."""
    by_id = measurements.by_id()
    missing = [e for e in features.egg_ids if e not in by_id]
    if missing:
        raise AlignmentError(f"egg ids absent from measurements: {missing[:10]}")
    keep: list[int] = []
    labels: list[str] = []
    exclusions: list[Exclusion] = []
    for i, egg_id in enumerate(features.egg_ids):
        try:
            labels.append(derive_label(by_id[egg_id], task))
        except HaughDomainError as exc:
            exclusions.append(Exclusion(egg_id, i, str(exc)))
            continue
        keep.append(i)
    kept = np.array(keep, dtype=np.intp)
    matrix = FeatureMatrix(
        egg_ids=tuple(features.egg_ids[i] for i in keep),
        columns=features.columns,
        values=features.values[kept],
        kind=features.kind,
    )
    return LabeledDataset(
        features=matrix, labels=tuple(labels), task=task, exclusions=tuple(exclusions)
    )


def label_classes(task: Task) -> tuple[str, str]:
    """(negative, positive) class names in sorted order for a task."""
    if task is Task.Grade:
        return (Grade2.High.value, Grade2.Low.value)
    return (Fresh2.Fresh.value, Fresh2.Old.value)


def positive_class(task: Task) -> str:
    """The class treated as 'positive' in confusion matrices and ROC:
    High for grade, Fresh for freshness."""
    return Grade2.High.value if task is Task.Grade else Fresh2.Fresh.value


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    if not path.exists():
        raise IngestionError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestionError(f"{path}: empty file") from None
        return [h.strip() for h in header], list(reader)
