"""Toolkit for scoring and steering multi-region visual text generation."""

__version__ = "0.1.0"
