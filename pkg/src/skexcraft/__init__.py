"""Generative modeling of CAD sketch-and-extrude construction sequences."""

__version__ = "0.1.0"
