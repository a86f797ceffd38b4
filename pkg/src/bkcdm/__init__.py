"""Exact computations with rank-2 Breuil-Kisin modules with tame descent data."""

__version__ = "0.1.0"
