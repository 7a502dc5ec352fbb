"""Rotation-based low-bit quantization toolkit."""

__version__ = "0.1.0"
