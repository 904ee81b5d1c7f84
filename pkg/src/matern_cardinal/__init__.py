"""Matern Cardinal - cardinal interpolation on scaled lattices with Matern kernels."""

__version__ = "0.1.0"
