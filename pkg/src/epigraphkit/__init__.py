"""Texture-based denoising and neural character segmentation for inscriptions."""

__version__ = "0.1.0"
