"""Ingestion, fusion, and label derivation against the reference dataset
counts (186 rows; grade 78/108; freshness 90/96) and error contracts."""

from __future__ import annotations

import numpy as np
import pytest

from eggq.data import (
    MEASUREMENT_COLUMNS,
    MatrixKind,
    Task,
    build_labeled_dataset,
    fuse,
    load_feature_matrix,
    load_measurements,
    save_feature_matrix,
    tabular_matrix,
)
from eggq.errors import AlignmentError, DataError, IngestionError

HEADER = ",".join(MEASUREMENT_COLUMNS)
GOOD_ROW = "e1,WM,55.0,42.0,55.0,17.0,40.0,7.0"


class TestReferenceCounts:
    def test_dataset_has_186_rows(self, measurements):
        assert len(measurements) == 186
        assert not measurements.exclusions

    def test_grade_counts_78_high_108_low(self, measurements):
        ds = build_labeled_dataset(
            tabular_matrix(measurements), measurements, Task.Grade
        )
        assert ds.label_counts() == {"High": 78, "Low": 108}

    def test_freshness_counts_90_fresh_96_old(self, measurements):
        ds = build_labeled_dataset(
            tabular_matrix(measurements), measurements, Task.Freshness
        )
        assert ds.label_counts() == {"Fresh": 90, "Old": 96}

    def test_high_grade_rows_are_all_fresh(self, measurements):
        grade = build_labeled_dataset(
            tabular_matrix(measurements), measurements, Task.Grade
        )
        fresh = build_labeled_dataset(
            tabular_matrix(measurements), measurements, Task.Freshness
        )
        pairs = set(zip(grade.labels, fresh.labels))
        assert ("High", "Old") not in pairs


class TestLoadMeasurements:
    def test_round_trip_is_deterministic(self, data_dir):
        a = load_measurements(data_dir / "measurements.csv")
        b = load_measurements(data_dir / "measurements.csv")
        assert a.rows == b.rows

    def test_empty_file_with_header_warns(self, tmp_path):
        p = tmp_path / "empty.csv"
        p.write_text(HEADER + "\n")
        with pytest.warns(UserWarning, match="no valid measurement rows"):
            table = load_measurements(p)
        assert len(table) == 0

    def test_missing_column_raises(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("egg_id,market,weight_g\ne1,WM,55\n")
        with pytest.raises(IngestionError, match="missing columns"):
            load_measurements(p)

    def test_duplicate_egg_id_raises(self, tmp_path):
        p = tmp_path / "dup.csv"
        p.write_text(f"{HEADER}\n{GOOD_ROW}\n{GOOD_ROW}\n")
        with pytest.raises(IngestionError, match="duplicate egg_id"):
            load_measurements(p)

    def test_unparseable_numeric_names_row_and_column(self, tmp_path):
        p = tmp_path / "nan.csv"
        p.write_text(f"{HEADER}\ne1,WM,55.0,42.0,oops,17.0,40.0,7.0\n")
        with pytest.raises(IngestionError, match="length_mm"):
            load_measurements(p)

    def test_zero_yolk_diameter_excluded_not_fatal(self, tmp_path):
        p = tmp_path / "excl.csv"
        p.write_text(
            f"{HEADER}\n{GOOD_ROW}\ne2,WM,55.0,42.0,55.0,17.0,0.0,7.0\n"
        )
        table = load_measurements(p)
        assert len(table) == 1
        assert len(table.exclusions) == 1
        assert table.exclusions[0].egg_id == "e2"
        assert "yolk_diameter" in table.exclusions[0].reason


class TestFeatureMatrix:
    def test_load_declares_image_kind(self, data_dir):
        m = load_feature_matrix(data_dir / "features_densenet169.csv")
        assert m.kind is MatrixKind.image
        assert m.n_cols == 1664
        assert m.n_rows == 186

    def test_resnet_exports_2048_columns(self, data_dir):
        for tag in ("resnet152", "resnet152v2"):
            assert load_feature_matrix(data_dir / f"features_{tag}.csv").n_cols == 2048

    def test_single_row_file(self, tmp_path):
        p = tmp_path / "one.csv"
        p.write_text("egg_id,f0,f1,f2\ne1,0.5,1.5,2.5\n")
        m = load_feature_matrix(p)
        assert m.values.shape == (1, 3)

    def test_non_finite_value_raises(self, tmp_path):
        p = tmp_path / "inf.csv"
        p.write_text("egg_id,f0\ne1,inf\n")
        with pytest.raises(IngestionError, match="non-finite"):
            load_feature_matrix(p)

    def test_ragged_row_raises(self, tmp_path):
        p = tmp_path / "rag.csv"
        p.write_text("egg_id,f0,f1\ne1,0.5\n")
        with pytest.raises(IngestionError, match="ragged"):
            load_feature_matrix(p)

    def test_save_load_bit_exact(self, tmp_path, data_dir):
        m = load_feature_matrix(data_dir / "features_densenet169.csv")
        out = tmp_path / "copy.csv"
        save_feature_matrix(m, out)
        again = load_feature_matrix(out)
        assert again.egg_ids == m.egg_ids
        assert np.array_equal(again.values, m.values)


class TestFusion:
    def test_2048_plus_tabular_is_2050(self, data_dir, measurements):
        image = load_feature_matrix(data_dir / "features_resnet152.csv")
        fused = fuse(image, measurements)
        assert fused.n_cols == 2050
        assert fused.kind is MatrixKind.fused
        assert fused.egg_ids == image.egg_ids

    def test_1664_plus_tabular_is_1666(self, data_dir, measurements):
        image = load_feature_matrix(data_dir / "features_densenet169.csv")
        assert fuse(image, measurements).n_cols == 1666

    def test_empty_spec_is_identity(self, data_dir, measurements):
        image = load_feature_matrix(data_dir / "features_resnet152.csv")
        assert fuse(image, measurements, tabular_spec=()) is image

    def test_unmatched_egg_id_raises(self, data_dir, measurements):
        image = load_feature_matrix(data_dir / "features_resnet152.csv")
        bad = type(image)(
            egg_ids=("ghost",) + image.egg_ids[1:],
            columns=image.columns,
            values=image.values,
            kind=image.kind,
        )
        with pytest.raises(AlignmentError, match="ghost"):
            fuse(bad, measurements)

    def test_tabular_values_are_weight_and_shape_index(self, measurements):
        tab = tabular_matrix(measurements)
        assert tab.columns == ("weight", "shape_index")
        m = measurements.rows[0]
        assert tab.values[0, 0] == m.weight
        assert tab.values[0, 1] == pytest.approx(100 * m.width / m.length)


class TestLabeledDataset:
    def test_single_class_dataset_rejected(self, measurements):
        from eggq.data import FeatureMatrix, LabeledDataset

        fm = FeatureMatrix(
            egg_ids=("a", "b"),
            columns=("f0",),
            values=np.ones((2, 1)),
            kind=MatrixKind.tabular,
        )
        with pytest.raises(DataError, match="both classes"):
            LabeledDataset(features=fm, labels=("High", "High"), task=Task.Grade)

    def test_y_is_binary_sorted_class_order(self, tabular_grade_dataset):
        y = tabular_grade_dataset.y()
        classes = tabular_grade_dataset.classes
        assert classes == ("High", "Low")
        assert set(np.unique(y)) == {0, 1}
        # 0 must correspond to the first sorted class.
        first = np.array(tabular_grade_dataset.labels) == "High"
        assert np.array_equal(y == 0, first)
