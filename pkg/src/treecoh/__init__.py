"""Compactly supported cohomology of truncated products of trees."""

__version__ = "0.1.0"
