"""Scalar conservation laws with Radon-measure initial data."""

__version__ = "0.1.0"
