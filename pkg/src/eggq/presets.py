"""Reference tables and canned ensemble configurations.

These encode the published reference results this pipeline replicates:
backbone output dimensionalities, reported PCA component counts, the
per-modality accuracy leaderboards, and the four majority-vote ensembles.
Reference accuracies are used only to report deviations — they are not
pass/fail targets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

# (tag, output_dim, reported_pca_components) per feature-extractor backbone.
BACKBONES: tuple[tuple[str, int, int], ...] = (
    ("inceptionresnetv2", 1536, 125),
    ("xception", 2048, 156),
    ("resnet101", 2048, 129),
    ("resnet152", 2048, 131),
    ("mobilenetv2", 1280, 163),
    ("densenet169", 1664, 166),
    ("inceptionv3", 2048, 160),
    ("resnet152v2", 2048, 74),
    ("efficientnetb7", 2560, 104),
    ("convnexttiny", 768, 138),
    ("convnextlarge", 1536, 132),
    ("densenet201", 1920, 157),
)

BACKBONE_DIMS: dict[str, int] = {tag: dim for tag, dim, _ in BACKBONES}
PCA_COMPONENT_REFERENCE: dict[str, int] = {tag: k for tag, _, k in BACKBONES}

# The three extractors whose features feed the final ensembles.
SELECTED_EXTRACTORS: tuple[str, ...] = ("resnet152", "densenet169", "resnet152v2")


@dataclass(frozen=True)
class EnsemblePreset:
    name: str
    task: str  # "grade" | "freshness"
    modality: str  # "image" | "multimodal"
    members: tuple[tuple[str, str], ...]  # (extractor_tag, classifier_family)
    reference_accuracy: float  # reported percentage for deviation reporting
    reference_auc: float


ENSEMBLE_PRESETS: dict[str, EnsemblePreset] = {
    p.name: p
    for p in (
        EnsemblePreset(
            name="grade-multimodal",
            task="grade",
            modality="multimodal",
            members=(
                ("resnet152", "XGBoostStyle"),
                ("densenet169", "MLP"),
                ("resnet152v2", "SVC"),
            ),
            reference_accuracy=86.57,
            reference_auc=0.91,
        ),
        EnsemblePreset(
            name="grade-image",
            task="grade",
            modality="image",
            members=(
                ("resnet152", "RandomForest"),
                ("densenet169", "MLP"),
                ("resnet152v2", "RandomForest"),
            ),
            reference_accuracy=85.19,
            reference_auc=0.88,
        ),
        EnsemblePreset(
            name="freshness-multimodal",
            task="freshness",
            modality="multimodal",
            members=(
                ("resnet152", "XGBoostStyle"),
                ("densenet169", "SVC"),
                ("resnet152v2", "MLP"),
            ),
            reference_accuracy=70.83,
            reference_auc=0.73,
        ),
        EnsemblePreset(
            name="freshness-image",
            task="freshness",
            modality="image",
            members=(
                ("resnet152", "MLP"),
                ("densenet169", "LogisticRegression"),
                ("resnet152v2", "RandomForest"),
            ),
            reference_accuracy=67.71,
            reference_auc=0.75,
        ),
    )
}


def get_preset(name: str) -> EnsemblePreset:
    if name not in ENSEMBLE_PRESETS:
        raise ConfigError(
            f"unknown ensemble preset {name!r}; available: "
            f"{sorted(ENSEMBLE_PRESETS)}"
        )
    return ENSEMBLE_PRESETS[name]


# Reported per-cell accuracies (%) by task → family → modality cell.
# Modality keys: "tabular" or "<image|multimodal>/<extractor tag>".
REFERENCE_LEADERBOARD: dict[str, dict[str, dict[str, float]]] = {
    "grade": {
        "LogisticRegression": {
            "tabular": 62.96,
            "image/resnet152": 70.83, "image/densenet169": 78.70, "image/resnet152v2": 72.69,
            "multimodal/resnet152": 68.98, "multimodal/densenet169": 77.31, "multimodal/resnet152v2": 71.30,
        },
        "DecisionTree": {
            "tabular": 62.04,
            "image/resnet152": 67.59, "image/densenet169": 57.87, "image/resnet152v2": 62.96,
            "multimodal/resnet152": 75.46, "multimodal/densenet169": 66.67, "multimodal/resnet152v2": 62.04,
        },
        "RandomForest": {
            "tabular": 62.50,
            "image/resnet152": 79.63, "image/densenet169": 79.17, "image/resnet152v2": 77.31,
            "multimodal/resnet152": 77.78, "multimodal/densenet169": 76.85, "multimodal/resnet152v2": 70.83,
        },
        "SVC": {
            "tabular": 62.50,
            "image/resnet152": 75.00, "image/densenet169": 78.70, "image/resnet152v2": 71.76,
            "multimodal/resnet152": 75.00, "multimodal/densenet169": 79.17, "multimodal/resnet152v2": 75.93,
        },
        "GradientBoosting": {
            "tabular": 60.65,
            "image/resnet152": 72.69, "image/densenet169": 67.59, "image/resnet152v2": 72.69,
            "multimodal/resnet152": 76.39, "multimodal/densenet169": 68.52, "multimodal/resnet152v2": 70.83,
        },
        "MLP": {
            "tabular": 65.74,
            "image/resnet152": 73.61, "image/densenet169": 79.63, "image/resnet152v2": 74.54,
            "multimodal/resnet152": 71.76, "multimodal/densenet169": 81.48, "multimodal/resnet152v2": 75.00,
        },
        "XGBoostStyle": {
            "tabular": 66.67,
            "image/resnet152": 77.31, "image/densenet169": 73.15, "image/resnet152v2": 74.54,
            "multimodal/resnet152": 80.56, "multimodal/densenet169": 74.07, "multimodal/resnet152v2": 71.30,
        },
        "LightGBMStyle": {
            "tabular": 65.74,
            "image/resnet152": 76.85, "image/densenet169": 67.13, "image/resnet152v2": 71.76,
            "multimodal/resnet152": 73.61, "multimodal/densenet169": 71.30, "multimodal/resnet152v2": 68.52,
        },
        "AdaBoost": {
            "tabular": 61.11,
            "image/resnet152": 74.07, "image/densenet169": 75.93, "image/resnet152v2": 75.93,
            "multimodal/resnet152": 75.46, "multimodal/densenet169": 77.31, "multimodal/resnet152v2": 74.07,
        },
    },
    "freshness": {
        "LogisticRegression": {
            "tabular": 60.94,
            "image/resnet152": 60.94, "image/densenet169": 67.71, "image/resnet152v2": 66.67,
            "multimodal/resnet152": 67.71, "multimodal/densenet169": 68.75, "multimodal/resnet152v2": 59.38,
        },
        "DecisionTree": {
            "tabular": 59.38,
            "image/resnet152": 55.73, "image/densenet169": 57.29, "image/resnet152v2": 57.89,
            "multimodal/resnet152": 59.90, "multimodal/densenet169": 56.25, "multimodal/resnet152v2": 55.73,
        },
        "RandomForest": {
            "tabular": 56.77,
            "image/resnet152": 60.94, "image/densenet169": 62.50, "image/resnet152v2": 67.71,
            "multimodal/resnet152": 65.62, "multimodal/densenet169": 61.46, "multimodal/resnet152v2": 57.29,
        },
        "SVC": {
            "tabular": 60.94,
            "image/resnet152": 61.46, "image/densenet169": 61.98, "image/resnet152v2": 64.06,
            "multimodal/resnet152": 66.67, "multimodal/densenet169": 70.31, "multimodal/resnet152v2": 63.54,
        },
        "GradientBoosting": {
            "tabular": 60.42,
            "image/resnet152": 56.77, "image/densenet169": 57.81, "image/resnet152v2": 58.33,
            "multimodal/resnet152": 65.62, "multimodal/densenet169": 55.73, "multimodal/resnet152v2": 55.21,
        },
        "MLP": {
            "tabular": 60.94,
            "image/resnet152": 66.15, "image/densenet169": 63.54, "image/resnet152v2": 67.19,
            "multimodal/resnet152": 65.62, "multimodal/densenet169": 69.27, "multimodal/resnet152v2": 63.54,
        },
        "XGBoostStyle": {
            "tabular": 61.98,
            "image/resnet152": 64.58, "image/densenet169": 64.58, "image/resnet152v2": 66.15,
            "multimodal/resnet152": 67.19, "multimodal/densenet169": 61.98, "multimodal/resnet152v2": 60.42,
        },
        "LightGBMStyle": {
            "tabular": 64.06,
            "image/resnet152": 59.38, "image/densenet169": 61.98, "image/resnet152v2": 60.94,
            "multimodal/resnet152": 62.50, "multimodal/densenet169": 58.33, "multimodal/resnet152v2": 53.65,
        },
        "AdaBoost": {
            "tabular": 57.81,
            "image/resnet152": 60.94, "image/densenet169": 60.94, "image/resnet152v2": 63.02,
            "multimodal/resnet152": 65.10, "multimodal/densenet169": 58.85, "multimodal/resnet152v2": 57.81,
        },
    },
}


def reference_cell(task: str, family: str, modality: str) -> float:
    try:
        return REFERENCE_LEADERBOARD[task][family][modality]
    except KeyError as exc:
        raise ConfigError(
            f"no reference cell for task={task!r} family={family!r} "
            f"modality={modality!r}"
        ) from exc
