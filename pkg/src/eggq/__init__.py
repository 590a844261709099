"""Egg grade and freshness classification from fused image and measurement features."""

__version__ = "1.0.0"
