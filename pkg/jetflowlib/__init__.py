"""Riemannian geometry of autonomous second-order ODEs."""

__version__ = '0.1.0'
