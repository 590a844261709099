"""Versioned binary container for fitted pipelines.

Layout (little-endian):

    8-byte magic ``EGGQBNDL``
    uint32 schema version
    uint32 section count
    uint64 header length, then UTF-8 JSON header
    per section: uint64 payload length, then raw array bytes

The JSON header carries everything except array payloads; each array is
replaced by a ``{"__ndarray__": section_index, "dtype": ..., "shape": ...}``
placeholder so the numeric sections stay byte-auditable. A digest of the
pipeline configuration is stored in the header and checked on load.
"""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classifiers import ClassifierModel, model_from_params
from .errors import BundleVersionError, IngestionError
from .pca import PcaModel

MAGIC = b"EGGQBNDL"
SCHEMA_VERSION = 1


def config_digest(config: dict) -> str:
    """Stable hex digest of a JSON-serializable configuration mapping."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class ModelBundle:
    pipeline_config: dict
    pca: PcaModel | None
    members: tuple[ClassifierModel, ...]
    classes: tuple[str, str]
    feature_columns: tuple[str, ...]
    schema_version: int = SCHEMA_VERSION
    member_tags: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        if not self.members:
            raise IngestionError("bundle must contain at least one fitted model")
        if self.member_tags and len(self.member_tags) != len(self.members):
            raise IngestionError("member_tags length must match members")

    def transform(self, X: np.ndarray) -> np.ndarray:
        if self.pca is None:
            return np.asarray(X, dtype=np.float64)
        from .pca import project

        return project(self.pca, X)

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        """Mean class-probability matrix over members (columns follow
        ``classes`` order)."""
        Z = self.transform(X)
        stacked = np.stack([m.predict_proba(Z) for m in self.members])
        return stacked.mean(axis=0)

    def predict(self, X: np.ndarray) -> np.ndarray:
        proba = self.predict_proba(X)
        idx = proba.argmax(axis=1)
        return np.asarray(self.classes, dtype=object)[idx]


def _encode(obj, sections: list[bytes]):
    if isinstance(obj, np.ndarray):
        if obj.dtype.kind in "OUS":  # label arrays: store as JSON strings
            return {"__strarray__": [str(x) for x in obj.tolist()]}
        arr = np.ascontiguousarray(obj)
        sections.append(arr.tobytes())
        return {
            "__ndarray__": len(sections) - 1,
            "dtype": str(arr.dtype),
            "shape": list(arr.shape),
        }
    if isinstance(obj, dict):
        return {k: _encode(v, sections) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v, sections) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def _decode(obj, sections: list[bytes]):
    if isinstance(obj, dict):
        if "__strarray__" in obj:
            return np.asarray(obj["__strarray__"], dtype=object)
        if "__ndarray__" in obj:
            raw = sections[obj["__ndarray__"]]
            return np.frombuffer(raw, dtype=np.dtype(obj["dtype"])).reshape(
                obj["shape"]
            ).copy()
        return {k: _decode(v, sections) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v, sections) for v in obj]
    return obj


def save_bundle(bundle: ModelBundle, path: str | Path) -> Path:
    path = Path(path)
    sections: list[bytes] = []
    header = {
        "schema_version": bundle.schema_version,
        "config_digest": config_digest(bundle.pipeline_config),
        "pipeline_config": bundle.pipeline_config,
        "classes": list(bundle.classes),
        "feature_columns": list(bundle.feature_columns),
        "member_tags": list(bundle.member_tags),
        "pca": None if bundle.pca is None else _encode(bundle.pca.to_params(), sections),
        "members": [_encode(m.to_params(), sections) for m in bundle.members],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    parts = [MAGIC, struct.pack("<II", bundle.schema_version, len(sections))]
    parts.append(struct.pack("<Q", len(blob)))
    parts.append(blob)
    for sec in sections:
        parts.append(struct.pack("<Q", len(sec)))
        parts.append(sec)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(b"".join(parts))
    tmp.replace(path)
    return path


def _take(buf: bytes, offset: int, n: int) -> tuple[bytes, int]:
    if offset + n > len(buf):
        raise IngestionError(
            f"truncated bundle: needed {n} bytes at offset {offset}, "
            f"file has {len(buf)}"
        )
    return buf[offset : offset + n], offset + n


def load_bundle(path: str | Path) -> ModelBundle:
    buf = Path(path).read_bytes()
    magic, off = _take(buf, 0, len(MAGIC))
    if magic != MAGIC:
        raise IngestionError(f"{path}: not a model bundle (bad magic)")
    head, off = _take(buf, off, 8)
    version, n_sections = struct.unpack("<II", head)
    if version != SCHEMA_VERSION:
        raise BundleVersionError(
            f"{path}: bundle schema version {version} requires migration; "
            f"this reader supports version {SCHEMA_VERSION}"
        )
    (hlen,), off = struct.unpack("<Q", _take(buf, off, 8)[0]), off + 8
    blob, off = _take(buf, off, hlen)
    try:
        header = json.loads(blob.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise IngestionError(f"{path}: corrupt bundle header: {exc}") from exc
    sections: list[bytes] = []
    for _ in range(n_sections):
        (slen,), off = struct.unpack("<Q", _take(buf, off, 8)[0]), off + 8
        sec, off = _take(buf, off, slen)
        sections.append(sec)
    stored = header.get("config_digest")
    actual = config_digest(header["pipeline_config"])
    if stored != actual:
        raise IngestionError(
            f"{path}: configuration digest mismatch ({stored} != {actual})"
        )
    pca = None
    if header["pca"] is not None:
        pca = PcaModel.from_params(_decode(header["pca"], sections))
    members = tuple(
        model_from_params(_decode(p, sections)) for p in header["members"]
    )
    return ModelBundle(
        pipeline_config=header["pipeline_config"],
        pca=pca,
        members=members,
        classes=tuple(header["classes"]),
        feature_columns=tuple(header["feature_columns"]),
        schema_version=version,
        member_tags=tuple(header.get("member_tags", ())),
    )
