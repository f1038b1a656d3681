"""Relational query fragments, Relational Diagrams, and query pattern analysis."""

__version__ = "0.1.0"
