"""Multiresolution subdivision shapes coupled to immersed b-spline elasticity."""

__version__ = "0.1.0"
