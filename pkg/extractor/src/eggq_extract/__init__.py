"""Frozen CNN backbone feature extraction for egg images."""

from .backbones import BACKBONES, BackboneSpec, list_backbones
from .extract import extract

__version__ = "1.0.0"

__all__ = ["BACKBONES", "BackboneSpec", "extract", "list_backbones"]
