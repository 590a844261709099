"""Backbone registry: architecture names, feature widths, preprocessing.

TensorFlow is imported lazily so listing backbones stays instant.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class BackboneSpec:
    """A frozen pretrained architecture used for feature export."""

    name: str
    expected_dim: int
    input_size: tuple[int, int] = (224, 224)
    # attribute paths under tf.keras.applications
    _constructor: str = ""
    _preprocess_module: str = ""


BACKBONES: tuple[BackboneSpec, ...] = (
    BackboneSpec("InceptionResNetV2", 1536,
                 _constructor="InceptionResNetV2",
                 _preprocess_module="inception_resnet_v2"),
    BackboneSpec("Xception", 2048,
                 _constructor="Xception", _preprocess_module="xception"),
    BackboneSpec("ResNet101", 2048,
                 _constructor="ResNet101", _preprocess_module="resnet"),
    BackboneSpec("ResNet152", 2048,
                 _constructor="ResNet152", _preprocess_module="resnet"),
    BackboneSpec("MobileNetV2", 1280,
                 _constructor="MobileNetV2", _preprocess_module="mobilenet_v2"),
    BackboneSpec("DenseNet169", 1664,
                 _constructor="DenseNet169", _preprocess_module="densenet"),
    BackboneSpec("InceptionV3", 2048,
                 _constructor="InceptionV3", _preprocess_module="inception_v3"),
    BackboneSpec("ResNet152V2", 2048,
                 _constructor="ResNet152V2", _preprocess_module="resnet_v2"),
    BackboneSpec("EfficientNetB7", 2560,
                 _constructor="EfficientNetB7", _preprocess_module="efficientnet"),
    BackboneSpec("ConvNeXtTiny", 768,
                 _constructor="ConvNeXtTiny", _preprocess_module="convnext"),
    BackboneSpec("ConvNeXtLarge", 1536,
                 _constructor="ConvNeXtLarge", _preprocess_module="convnext"),
    BackboneSpec("DenseNet201", 1920,
                 _constructor="DenseNet201", _preprocess_module="densenet"),
)

_BY_NAME = {spec.name.lower(): spec for spec in BACKBONES}


def list_backbones() -> list[tuple[str, int]]:
    """(name, feature width) for every supported architecture."""
    return [(spec.name, spec.expected_dim) for spec in BACKBONES]


def get_backbone(name: str) -> BackboneSpec:
    spec = _BY_NAME.get(name.lower())
    if spec is None:
        known = ", ".join(s.name for s in BACKBONES)
        raise KeyError(f"unknown backbone {name!r}; supported: {known}")
    return spec


def build_model(spec: BackboneSpec, weights: str = "imagenet"):
    """Headless frozen backbone with global average pooling.

    Returns ``(model, preprocess_fn, provenance)``. If pretrained weights
    cannot be fetched (offline environment), falls back to a deterministic
    seeded random initialization and reports that in ``provenance`` — the
    feature geometry (width, pooling) is unchanged, only the learned
    filters are.
    """
    import tensorflow as tf

    applications = tf.keras.applications
    constructor = getattr(applications, spec._constructor)
    preprocess = getattr(applications, spec._preprocess_module).preprocess_input
    shape = (*spec.input_size, 3)
    try:
        model = constructor(include_top=False, weights=weights,
                            pooling="avg", input_shape=shape)
        provenance = f"keras-applications:{weights}"
    except Exception:
        tf.keras.utils.set_random_seed(0)
        model = constructor(include_top=False, weights=None,
                            pooling="avg", input_shape=shape)
        provenance = "random-init:seed=0 (pretrained weights unavailable)"
    model.trainable = False
    return model, preprocess, provenance
