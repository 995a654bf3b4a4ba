"""Metadata extraction from scanned thesis cover pages."""

__version__ = "0.1.0"
