"""Session fixtures: one synthetic dataset generation per test run.

``data_dir`` carries full-width feature matrices (2048/1664/2048 columns)
for replication-grade checks; ``small_data_dir`` uses narrow matrices so
structural tests stay fast.
"""

from __future__ import annotations

import pytest

from eggq.data import (
    Task,
    build_labeled_dataset,
    fuse,
    load_feature_matrix,
    load_measurements,
    tabular_matrix,
)
from eggq.synthetic import write_feature_csvs

FULL_DIMS = {"resnet152": 2048, "densenet169": 1664, "resnet152v2": 2048}
SMALL_DIMS = {"resnet152": 96, "densenet169": 80, "resnet152v2": 96}


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data_full")
    write_feature_csvs(out, FULL_DIMS)
    return out


@pytest.fixture(scope="session")
def small_data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data_small")
    write_feature_csvs(out, SMALL_DIMS)
    return out


@pytest.fixture(scope="session")
def measurements(data_dir):
    return load_measurements(data_dir / "measurements.csv")


@pytest.fixture(scope="session")
def grade_dataset(data_dir, measurements):
    image = load_feature_matrix(data_dir / "features_resnet152.csv")
    return build_labeled_dataset(fuse(image, measurements), measurements, Task.Grade)


@pytest.fixture(scope="session")
def freshness_dataset(data_dir, measurements):
    image = load_feature_matrix(data_dir / "features_resnet152.csv")
    return build_labeled_dataset(
        fuse(image, measurements), measurements, Task.Freshness
    )


@pytest.fixture(scope="session")
def tabular_grade_dataset(measurements):
    return build_labeled_dataset(tabular_matrix(measurements), measurements, Task.Grade)


@pytest.fixture(scope="session")
def small_grade_datasets(small_data_dir):
    """{tag: fused grade dataset} over the narrow feature matrices."""
    table = load_measurements(small_data_dir / "measurements.csv")
    out = {}
    for tag in SMALL_DIMS:
        image = load_feature_matrix(small_data_dir / f"features_{tag}.csv")
        out[tag] = build_labeled_dataset(fuse(image, table), table, Task.Grade)
    return out
