"""Nested hierarchical Dirichlet process clustering of two-level areal data."""

__version__ = "0.1.0"
