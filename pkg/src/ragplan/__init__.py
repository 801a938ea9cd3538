"""Retrieval-augmented plan generation for tabletop manipulation."""

__version__ = "0.1.0"
