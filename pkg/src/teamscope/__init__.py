"""Reconstruct the lead/support hierarchy of scientific teams from contribution statements."""

__version__ = "0.1.0"
