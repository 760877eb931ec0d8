"""Walls, horoballs and dual cube complexes for staggered presentations."""

__version__ = "0.1.0"
