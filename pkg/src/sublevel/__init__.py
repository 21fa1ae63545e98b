"""Numerical laboratory for sublevel-set estimates under Laplacian constraints."""

__version__ = "0.1.0"
