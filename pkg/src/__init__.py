"""Optimal transport toolkit on the half-sphere."""

__version__ = "0.1.0"
