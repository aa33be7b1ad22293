"""Measure and map knowledge flow between two research fields from citation data."""

__version__ = "0.1.0"
