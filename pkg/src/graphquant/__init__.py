"""Exact graph-complex calculus and weight integration for deformation quantization."""

__version__ = "0.1.0"
