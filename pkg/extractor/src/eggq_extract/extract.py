"""Batch feature export: images in, feature CSV + sidecar manifest out.

Output schema matches the pipeline's feature CSV: header
``egg_id,f0,...,f{D-1}``, one row per image, ``repr(float)`` cells.
"""

from __future__ import annotations

import csv
import json
import warnings
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .backbones import BackboneSpec, build_model, get_backbone

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp", ".tiff", ".webp")


class DimensionMismatchError(RuntimeError):
    """The model emitted a different feature width than the registry expects."""


def _load_image(path: Path, size: tuple[int, int]) -> np.ndarray | None:
    try:
        with Image.open(path) as img:
            img = img.convert("RGB").resize(size, Image.BILINEAR)
            return np.asarray(img, dtype=np.float32)
    except (UnidentifiedImageError, OSError) as exc:
        warnings.warn(f"skipping unreadable image {path}: {exc}")
        return None


def _collect_images(image_dir: Path) -> list[Path]:
    paths = [
        p for p in sorted(image_dir.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    ]
    if not paths:
        warnings.warn(f"no images found in {image_dir}")
    return paths


def extract(
    image_dir: str | Path,
    backbone: str | BackboneSpec,
    out_csv: str | Path,
    batch_size: int = 8,
    weights: str = "imagenet",
) -> Path:
    """Run the frozen backbone over every image and write the feature CSV.

    Row ids are the image file stems; rows appear in sorted filename
    order. A ``<out_csv>.manifest.json`` sidecar records the backbone,
    feature width, input size, and weight provenance.
    """
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise FileNotFoundError(f"image directory not found: {image_dir}")
    spec = backbone if isinstance(backbone, BackboneSpec) else get_backbone(backbone)
    out_csv = Path(out_csv)

    paths = _collect_images(image_dir)
    ids: list[str] = []
    batches: list[np.ndarray] = []
    pending: list[np.ndarray] = []
    model = preprocess = provenance = None
    if paths:
        model, preprocess, provenance = build_model(spec, weights=weights)
    for path in paths:
        pixels = _load_image(path, spec.input_size)
        if pixels is None:
            continue
        ids.append(path.stem)
        pending.append(pixels)
        if len(pending) == batch_size:
            batches.append(_run_batch(model, preprocess, pending, spec))
            pending = []
    if pending:
        batches.append(_run_batch(model, preprocess, pending, spec))

    features = (
        np.concatenate(batches, axis=0)
        if batches else np.empty((0, spec.expected_dim))
    )
    if not np.isfinite(features).all():
        raise DimensionMismatchError(
            f"{spec.name} produced non-finite feature values"
        )

    out_csv.parent.mkdir(parents=True, exist_ok=True)
    with out_csv.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["egg_id"] + [f"f{i}" for i in range(spec.expected_dim)])
        for egg_id, row in zip(ids, features):
            writer.writerow([egg_id] + [repr(float(v)) for v in row])
    manifest = {
        "backbone": spec.name,
        "feature_width": spec.expected_dim,
        "input_size": list(spec.input_size),
        "pooling": "global_average",
        "weights": provenance or "not loaded (no images)",
        "rows": len(ids),
    }
    Path(str(out_csv) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )
    return out_csv


def _run_batch(model, preprocess, pixels: list[np.ndarray], spec: BackboneSpec) -> np.ndarray:
    batch = preprocess(np.stack(pixels))
    out = np.asarray(model(batch, training=False), dtype=np.float64)
    if out.shape[1] != spec.expected_dim:
        raise DimensionMismatchError(
            f"{spec.name} emitted {out.shape[1]} features, expected {spec.expected_dim}"
        )
    return out
