"""Numerical laboratory for damped wave equations and their heat profiles."""

__version__ = "0.1.0"
