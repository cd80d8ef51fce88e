"""Sense disambiguation, synonym-set sense vectors, and WMD similarity."""

__version__ = "0.1.0"
